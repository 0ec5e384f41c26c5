"""Configuration parsing, test map families, and the full iteration driver."""

import math

import numpy as np
import pytest

from kamconj import (
    ConfigError,
    ExperimentConfig,
    OutOfRegime,
    PeriodicField,
    ResidualTooLarge,
    RunStatus,
    TorusMapLift,
    compose_chain,
    conjugacy_verification,
    deviation_norm,
    eval_at_points,
    make_test_map,
    run_scheme,
)
from kamconj.io import load_map, save_map

from conftest import GOLDEN, PAIR_2D


CONJ_PARAMS = {"amplitude": 0.005}


def minimal_config(**overrides) -> dict:
    raw = {
        "alpha": "golden",
        "initial_map": {"kind": "conjugate", "params": CONJ_PARAMS},
        "seed": 5,
        "smallness_c": 1e-6,
    }
    raw.update(overrides)
    return raw


class TestConfig:
    def test_defaults_1d(self):
        cfg = ExperimentConfig.from_dict(minimal_config())
        assert cfg.alpha[0] == pytest.approx(GOLDEN)
        assert cfg.tau == 1.0
        assert cfg.gamma is None
        assert cfg.eps_stop == 1e-9
        assert cfg.max_iters == 12
        assert cfg.start_cutoff == 8
        assert cfg.sigma == 0.5 and cfg.lambda_ == 3.0 and cfg.mu == 7.5 and cfg.nu == 2.0

    def test_defaults_2d(self):
        cfg = ExperimentConfig.from_dict(minimal_config(alpha=["sqrt2-1", "sqrt3-1"]))
        assert cfg.tau == 2.0
        assert np.allclose(cfg.alpha, PAIR_2D)

    def test_alpha_forms(self):
        assert ExperimentConfig.from_dict(minimal_config(alpha=0.37)).alpha[0] == 0.37
        assert ExperimentConfig.from_dict(minimal_config(alpha=[0.37])).alpha[0] == 0.37
        mixed = ExperimentConfig.from_dict(minimal_config(alpha=["golden", 0.25]))
        assert mixed.alpha[0] == pytest.approx(GOLDEN) and mixed.alpha[1] == 0.25

    def test_unknown_tag_rejected(self):
        with pytest.raises(ConfigError, match="tag"):
            ExperimentConfig.from_dict(minimal_config(alpha="platinum"))

    def test_dimension_limit(self):
        with pytest.raises(ConfigError, match="components"):
            ExperimentConfig.from_dict(minimal_config(alpha=[0.1, 0.2, 0.3]))

    def test_unknown_keys_rejected_everywhere(self):
        with pytest.raises(ConfigError, match="unknown keys in config"):
            ExperimentConfig.from_dict(minimal_config(typo=1))
        with pytest.raises(ConfigError, match="unknown keys in scheduler"):
            ExperimentConfig.from_dict(minimal_config(scheduler={"sigm": 0.5}))
        with pytest.raises(ConfigError, match="unknown keys in tolerances"):
            ExperimentConfig.from_dict(minimal_config(tolerances={"eps": 1.0}))
        with pytest.raises(ConfigError, match="unknown keys in initial_map"):
            ExperimentConfig.from_dict(
                minimal_config(initial_map={"kind": "conjugate", "path": "x"})
            )
        with pytest.raises(ConfigError, match="unknown keys in output"):
            ExperimentConfig.from_dict(minimal_config(output={"log": "x"}))

    def test_required_keys(self):
        for key in ("alpha", "initial_map", "seed"):
            raw = minimal_config()
            del raw[key]
            with pytest.raises(ConfigError, match=key):
                ExperimentConfig.from_dict(raw)

    def test_gamma_validation(self):
        assert ExperimentConfig.from_dict(minimal_config(gamma="auto")).gamma is None
        assert ExperimentConfig.from_dict(minimal_config(gamma=3.5)).gamma == 3.5
        with pytest.raises(ConfigError, match="positive"):
            ExperimentConfig.from_dict(minimal_config(gamma=-1.0))

    def test_initial_map_needs_source(self):
        with pytest.raises(ConfigError, match="file.*kind|kind.*file"):
            ExperimentConfig.from_dict(minimal_config(initial_map={}))

    def test_non_object_rejected(self):
        with pytest.raises(ConfigError, match="object"):
            ExperimentConfig.from_dict([1, 2, 3])


class TestMakeTestMap:
    def test_conjugate_is_near_rotation(self):
        f = make_test_map("conjugate", {}, [GOLDEN], seed=9)
        assert deviation_norm(f, [GOLDEN]) < 0.2
        assert abs(f.rho[0] - GOLDEN) < 0.01

    def test_reproducible_across_calls(self):
        a = make_test_map("conjugate", {}, [GOLDEN], seed=9)
        b = make_test_map("conjugate", {}, [GOLDEN], seed=9)
        assert np.array_equal(a.rho, b.rho)
        for ua, ub in zip(a.displacement, b.displacement):
            assert np.array_equal(ua.coeffs, ub.coeffs)

    def test_seed_changes_map(self):
        a = make_test_map("conjugate", {}, [GOLDEN], seed=9)
        b = make_test_map("conjugate", {}, [GOLDEN], seed=10)
        assert not np.array_equal(a.displacement[0].coeffs, b.displacement[0].coeffs)

    def test_drifted_offsets_translation(self):
        base = make_test_map("conjugate", {}, [GOLDEN], seed=9)
        drifted = make_test_map("drifted", {"delta": [0.01]}, [GOLDEN], seed=9)
        assert drifted.rho[0] == pytest.approx(base.rho[0] + 0.01, abs=1e-15)

    def test_drifted_delta_dimension(self):
        with pytest.raises(ConfigError, match="delta"):
            make_test_map("drifted", {"delta": [0.01, 0.02]}, [GOLDEN], seed=9)

    def test_single_mode_1d(self):
        f = make_test_map("single-mode", {"modes": [[1, 0.0, -5e-4]]}, [GOLDEN], seed=0)
        assert f.rho[0] == pytest.approx(GOLDEN)
        assert f.displacement[0].coefficient((1,)) == pytest.approx(-5e-4j)

    def test_single_mode_2d(self):
        modes = [[[(1, 0), 1e-4, 0.0]], [[(0, 1), 0.0, 1e-4]]]
        f = make_test_map("single-mode", {"modes": modes}, PAIR_2D, seed=0)
        assert f.displacement[0].coefficient((1, 0)) == pytest.approx(1e-4)
        assert f.displacement[1].coefficient((0, 1)) == pytest.approx(1e-4j)

    def test_single_mode_needs_modes(self):
        with pytest.raises(ConfigError, match="modes"):
            make_test_map("single-mode", {}, [GOLDEN], seed=0)

    def test_random_decay_keeps_alpha(self):
        f = make_test_map("random-decay", {"degree": 4, "amplitude": 0.005}, [GOLDEN], seed=3)
        assert f.rho[0] == pytest.approx(GOLDEN, abs=1e-15)
        assert f.degree == 4

    def test_out_of_regime(self):
        with pytest.raises(OutOfRegime):
            make_test_map("random-decay", {"amplitude": 0.5}, [GOLDEN], seed=3)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="kind"):
            make_test_map("bogus", {}, [GOLDEN], seed=0)

    def test_unknown_params_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            make_test_map("conjugate", {"amp": 1.0}, [GOLDEN], seed=0)


class TestChainHelpers:
    def test_compose_chain_empty(self):
        with pytest.raises(ValueError, match="empty"):
            compose_chain([])

    def test_compose_chain_single(self):
        phi = TorusMapLift(np.zeros(1), (PeriodicField.from_entries(1, 1, [((1,), -0.005j)]),))
        total = compose_chain([phi])
        assert total is phi

    def test_conjugacy_verification_exact_for_rotation(self):
        h = TorusMapLift.identity(1)
        f = TorusMapLift.rotation([GOLDEN])
        assert conjugacy_verification(h, f, [GOLDEN]) < 1e-15


class TestRunScheme:
    def test_pure_rotation_converges_without_steps(self, tmp_path):
        path = tmp_path / "rot.json"
        save_map(TorusMapLift.rotation([GOLDEN]), path)
        cfg = ExperimentConfig.from_dict(minimal_config(initial_map={"file": str(path)}))
        res = run_scheme(cfg)
        assert res.status is RunStatus.CONVERGED
        assert res.exit_code == 0
        assert res.n_steps == 0
        assert res.trace == []
        assert res.final_eps0 == 0.0
        assert res.composed is None and res.verification_residual is None

    def test_exact_conjugate_converges(self):
        cfg = ExperimentConfig.from_dict(minimal_config())
        res = run_scheme(cfg)
        assert res.status is RunStatus.CONVERGED
        assert res.final_eps0 <= 1e-9
        assert res.n_steps <= 8
        assert res.verification_residual is not None
        assert res.verification_residual <= 1e-8
        # schedule follows N_{n+1} = N_n^(1+sigma) from the start cutoff
        assert [row[1] for row in res.trace] == [8, 23, 108][: res.n_steps]
        assert all(row[9] == 1 for row in res.trace)

    def test_composed_map_satisfies_conjugacy_pointwise(self):
        cfg = ExperimentConfig.from_dict(minimal_config())
        res = run_scheme(cfg)
        h = res.composed
        f0 = make_test_map("conjugate", CONJ_PARAMS, [GOLDEN], seed=5)
        xs = np.random.default_rng(1).random(25)
        hx = xs + eval_at_points(h.displacement[0], xs) + h.rho[0]
        fx = f0(xs)
        hfx = fx + eval_at_points(h.displacement[0], fx) + h.rho[0]
        assert np.max(np.abs(hfx - hx - GOLDEN)) < 1e-8

    def test_drifted_map_obstructs_at_first_step(self):
        cfg = ExperimentConfig.from_dict(
            minimal_config(initial_map={"kind": "drifted", "params": {"delta": [0.01]}})
        )
        res = run_scheme(cfg)
        assert res.status is RunStatus.DRIFT_OBSTRUCTION
        assert res.exit_code == 4
        assert res.n_steps == 1

    def test_superlinear_contraction_on_single_mode(self):
        cfg = ExperimentConfig.from_dict(
            minimal_config(
                initial_map={"kind": "single-mode", "params": {"modes": [[1, 0.0, -5e-5]]}},
                tolerances={"eps_stop": 1e-13, "max_iters": 3},
            )
        )
        res = run_scheme(cfg)
        eps_values = [row[2] for row in res.trace]
        for before, after in zip(eps_values, eps_values[1:]):
            assert after <= before ** 1.5

    def test_max_iters_classification(self):
        cfg = ExperimentConfig.from_dict(
            minimal_config(tolerances={"eps_stop": 1e-9, "max_iters": 1})
        )
        res = run_scheme(cfg)
        assert res.status is RunStatus.MAX_ITERS
        assert res.exit_code == 2
        assert res.n_steps == 1

    def test_diverged_when_smallness_never_holds(self):
        cfg = ExperimentConfig.from_dict(minimal_config(smallness_c=1e6))
        res = run_scheme(cfg)
        assert res.status is RunStatus.DIVERGED
        assert res.exit_code == 3
        assert res.trace[-1][9] == 0

    def test_residual_tolerance_enforced(self):
        cfg = ExperimentConfig.from_dict(
            minimal_config(tolerances={"residual_tol": 1e-18})
        )
        with pytest.raises(ResidualTooLarge):
            run_scheme(cfg)

    def test_outputs_written(self, tmp_path):
        trace_path = tmp_path / "trace.csv"
        map_path = tmp_path / "final.json"
        chain_path = tmp_path / "chain.json"
        cfg = ExperimentConfig.from_dict(
            minimal_config(
                output={
                    "trace": str(trace_path),
                    "final_map": str(map_path),
                    "chain": str(chain_path),
                }
            )
        )
        res = run_scheme(cfg)
        text = trace_path.read_text().splitlines()
        assert text[0] == "n,N,eps0,eps_s0,drift,drift_bound,env_eps0,env_eps_s0,phi_norm0,accepted"
        assert len(text) == 1 + len(res.trace)
        restored = load_map(map_path)
        assert np.array_equal(restored.rho, res.final_map.rho)
        assert chain_path.exists()

    def test_initial_map_dimension_mismatch(self, tmp_path):
        path = tmp_path / "rot2.json"
        save_map(TorusMapLift.rotation(PAIR_2D), path)
        cfg = ExperimentConfig.from_dict(minimal_config(initial_map={"file": str(path)}))
        with pytest.raises(ConfigError, match="dimension"):
            run_scheme(cfg)

    def test_2d_conjugate_converges(self):
        # two quadratic steps reach 1e-6; the tight-tolerance 2D run lives in
        # the acceptance suite
        cfg = ExperimentConfig.from_dict(
            minimal_config(
                alpha=["sqrt2-1", "sqrt3-1"],
                initial_map={
                    "kind": "conjugate",
                    "params": {"degree": 2, "amplitude": 0.005, "target_degree": 8},
                },
                tolerances={"eps_stop": 1e-6},
                smallness_c=1e-16,
                seed=11,
            )
        )
        res = run_scheme(cfg)
        assert res.status is RunStatus.CONVERGED
        assert res.final_eps0 <= 1e-6
        assert res.n_steps <= 2
