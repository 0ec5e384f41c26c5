"""File formats: JSON documents for fields, maps and conjugacy chains, CSV traces.

Floats are serialized through repr() so round-trips are lossless.  Every JSON
document carries schema_version and a kind tag.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError
from .rotation import Hull
from .spectral import PeriodicField, TorusMapLift

__all__ = [
    "SCHEMA_VERSION",
    "TRACE_HEADER",
    "field_to_doc",
    "field_from_doc",
    "map_to_doc",
    "map_from_doc",
    "chain_to_doc",
    "chain_from_doc",
    "save_json",
    "load_json",
    "save_map",
    "load_map",
    "save_chain",
    "load_chain",
    "trace_to_csv",
    "hull_to_csv",
]

SCHEMA_VERSION = 1

TRACE_HEADER = "n,N,eps0,eps_s0,drift,drift_bound,env_eps0,env_eps_s0,phi_norm0,accepted"


def _f(x) -> float:
    return float(x)


def field_to_doc(f: PeriodicField) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "field",
        "dim": f.dim,
        "degree": f.degree,
        "coeffs": [[list(k), _f(c.real), _f(c.imag)] for k, c in f.entries()],
    }


def _expect(doc: dict, kind: str) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"expected a JSON object for a {kind} document")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {doc.get('schema_version')!r}")
    if "kind" in doc and doc["kind"] != kind:
        raise ConfigError(f"expected kind {kind!r}, found {doc.get('kind')!r}")


def field_from_doc(doc: dict) -> PeriodicField:
    _expect(doc, "field")
    entries = [(tuple(int(x) for x in k), complex(re, im)) for k, re, im in doc["coeffs"]]
    return PeriodicField.from_entries(int(doc["dim"]), int(doc["degree"]), entries)


def map_to_doc(f: TorusMapLift) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "torus_map",
        "dim": f.dim,
        "degree": f.degree,
        "rho": [_f(x) for x in f.rho],
        # one coefficient list per displacement component, in axis order
        "coeffs": [
            [[list(k), _f(c.real), _f(c.imag)] for k, c in u.entries()]
            for u in f.displacement
        ],
    }


def map_from_doc(doc: dict) -> TorusMapLift:
    _expect(doc, "torus_map")
    dim = int(doc["dim"])
    degree = int(doc["degree"])
    comps = doc["coeffs"]
    if len(comps) != dim:
        raise ConfigError("component count does not match dim")
    fields = tuple(
        PeriodicField.from_entries(
            dim, degree, [(tuple(int(x) for x in k), complex(re, im)) for k, re, im in comp]
        )
        for comp in comps
    )
    return TorusMapLift(np.array([float(x) for x in doc["rho"]]), fields)


def chain_to_doc(chain, alpha, composed: TorusMapLift | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "conjugacy_chain",
        "dim": len(np.atleast_1d(alpha)),
        "alpha": [_f(x) for x in np.atleast_1d(alpha)],
        "steps": [map_to_doc(phi) for phi in chain],
    }
    if composed is not None:
        doc["composed"] = map_to_doc(composed)
    return doc


def chain_from_doc(doc: dict) -> tuple:
    """Returns (list of corrector maps, alpha, composed or None)."""
    _expect(doc, "conjugacy_chain")
    chain = [map_from_doc(d) for d in doc["steps"]]
    composed = map_from_doc(doc["composed"]) if "composed" in doc else None
    return chain, np.array([float(x) for x in doc["alpha"]]), composed


def save_json(doc: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def save_map(f: TorusMapLift, path) -> None:
    save_json(map_to_doc(f), path)


def load_map(path) -> TorusMapLift:
    return map_from_doc(load_json(path))


def save_chain(chain, alpha, path, composed: TorusMapLift | None = None) -> None:
    save_json(chain_to_doc(chain, alpha, composed), path)


def load_chain(path) -> tuple:
    return chain_from_doc(load_json(path))


def trace_to_csv(rows, path) -> None:
    """Write iteration trace rows under the fixed header.

    Each row is (n, N, eps0, eps_s0, drift, drift_bound, env_eps0, env_eps_s0,
    phi_norm0, accepted); floats go through repr for lossless round-trips.
    """
    lines = [TRACE_HEADER]
    for row in rows:
        n, cutoff, *floats, accepted = row
        cells = [str(int(n)), str(int(cutoff))]
        cells += [repr(float(x)) for x in floats]
        cells.append(str(int(accepted)))
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def hull_to_csv(hull: Hull, path) -> None:
    cols = ",".join(f"x{i + 1}" for i in range(hull.dim))
    lines = [cols]
    for v in np.atleast_2d(hull.vertices):
        lines.append(",".join(repr(float(x)) for x in np.atleast_1d(v)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
