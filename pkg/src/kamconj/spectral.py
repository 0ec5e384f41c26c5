"""Band-limited real fields on the torus and lifts of near-rotation maps.

Coefficients live on the index box [-N, N]^d, but only the l1 ball
|k|_1 <= N carries data; constructors zero the corners.  Fields are
real-valued, so coefficient arrays are kept exactly Hermitian-symmetric.
Dimensions 1 and 2 are supported.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AliasingRisk, NoConvergence, NotContractive

__all__ = [
    "PeriodicField",
    "TorusMapLift",
    "frequency_axis",
    "sampling_grid",
    "value_grid",
    "field_from_grid",
    "eval_at_points",
    "truncate",
    "cs_norm",
    "deviation_norm",
    "rebase",
    "compose",
    "invert_near_identity",
    "conjugate",
]


def frequency_axis(degree: int) -> np.ndarray:
    return np.arange(-degree, degree + 1)


def _l1_radii(dim: int, degree: int) -> np.ndarray:
    ax = np.abs(frequency_axis(degree))
    if dim == 1:
        return ax
    return ax[:, None] + ax[None, :]


def _round4(m: int) -> int:
    return ((int(m) + 3) // 4) * 4


@dataclass(frozen=True, eq=False)
class PeriodicField:
    """Real trigonometric polynomial with spectrum in the l1 ball of radius `degree`."""

    dim: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        n = 2 * self.degree + 1
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (n,) * self.dim:
            raise ValueError(
                f"coefficient box must have shape {(n,) * self.dim}, got {c.shape}"
            )
        flipped = np.conj(np.flip(c))
        scale = max(1.0, float(np.max(np.abs(c))))
        if float(np.max(np.abs(c - flipped))) > 1e-9 * scale:
            raise ValueError("coefficients are not Hermitian-symmetric (field must be real)")
        c = 0.5 * (c + flipped)
        c[_l1_radii(self.dim, self.degree) > self.degree] = 0.0
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, dim: int, degree: int = 0) -> "PeriodicField":
        n = 2 * degree + 1
        return cls(dim, degree, np.zeros((n,) * dim, dtype=np.complex128))

    @classmethod
    def constant(cls, dim: int, value: float) -> "PeriodicField":
        box = np.full((1,) * dim, complex(value))
        return cls(dim, 0, box)

    @classmethod
    def from_entries(cls, dim: int, degree: int, entries) -> "PeriodicField":
        """Build a field from (k, value) pairs.

        The mirror coefficient at -k is filled with the conjugate unless it is
        given explicitly; inconsistent explicit pairs are rejected by the
        constructor's symmetry check.
        """
        box = np.zeros((2 * degree + 1,) * dim, dtype=np.complex128)
        given = {}
        for k, val in entries:
            k = (int(k),) if np.isscalar(k) else tuple(int(x) for x in k)
            if len(k) != dim:
                raise ValueError(f"frequency {k} does not match dimension {dim}")
            if sum(abs(x) for x in k) > degree:
                raise ValueError(f"frequency {k} outside the l1 ball of radius {degree}")
            box[tuple(x + degree for x in k)] = complex(val)
            given[k] = complex(val)
        for k, val in given.items():
            mk = tuple(-x for x in k)
            if mk not in given:
                box[tuple(x + degree for x in mk)] = np.conj(val)
        return cls(dim, degree, box)

    def coefficient(self, k) -> complex:
        k = (int(k),) if np.isscalar(k) else tuple(int(x) for x in k)
        if any(abs(x) > self.degree for x in k):
            return 0.0 + 0.0j
        return complex(self.coeffs[tuple(x + self.degree for x in k)])

    def entries(self) -> list:
        """Nonzero (k, coefficient) pairs in lexicographic frequency order."""
        out = []
        for idx in np.ndindex(self.coeffs.shape):
            v = self.coeffs[idx]
            if v != 0:
                out.append((tuple(i - self.degree for i in idx), complex(v)))
        return out

    def mean(self) -> float:
        return float(self.coeffs[(self.degree,) * self.dim].real)

    def _embed(self, degree: int) -> np.ndarray:
        if degree == self.degree:
            return self.coeffs
        if degree < self.degree:
            raise ValueError("cannot embed into a smaller box")
        box = np.zeros((2 * degree + 1,) * self.dim, dtype=np.complex128)
        lo, hi = degree - self.degree, degree + self.degree + 1
        box[(slice(lo, hi),) * self.dim] = self.coeffs
        return box

    def __add__(self, other):
        if np.isscalar(other):
            c = self.coeffs.copy()
            c[(self.degree,) * self.dim] += complex(other).real
            return PeriodicField(self.dim, self.degree, c)
        if not isinstance(other, PeriodicField):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        deg = max(self.degree, other.degree)
        return PeriodicField(self.dim, deg, self._embed(deg) + other._embed(deg))

    __radd__ = __add__

    def __neg__(self):
        return PeriodicField(self.dim, self.degree, -self.coeffs)

    def __sub__(self, other):
        if np.isscalar(other):
            return self + (-other)
        if not isinstance(other, PeriodicField):
            return NotImplemented
        return self + (-other)

    def __mul__(self, factor):
        if not np.isscalar(factor):
            return NotImplemented
        if abs(complex(factor).imag) > 0:
            raise ValueError("only real scalar factors keep the field real")
        return PeriodicField(self.dim, self.degree, self.coeffs * float(np.real(factor)))

    __rmul__ = __mul__

    def shift(self, delta) -> "PeriodicField":
        """Translate the argument: (shifted f)(x) = f(x + delta).  Exact."""
        delta = np.atleast_1d(np.asarray(delta, dtype=float))
        if delta.size != self.dim:
            raise ValueError("shift vector does not match dimension")
        ax = frequency_axis(self.degree)
        if self.dim == 1:
            phase = np.exp(2j * np.pi * ax * delta[0])
        else:
            phase = np.exp(2j * np.pi * (ax[:, None] * delta[0] + ax[None, :] * delta[1]))
        return PeriodicField(self.dim, self.degree, self.coeffs * phase)

    def derivative(self, order=1) -> "PeriodicField":
        """Partial derivative of the given multi-order (an int is accepted in 1D)."""
        if np.isscalar(order):
            if self.dim != 1:
                raise ValueError("scalar order is only unambiguous in 1D")
            order = (int(order),)
        order = tuple(int(o) for o in order)
        if len(order) != self.dim or any(o < 0 for o in order):
            raise ValueError(f"bad derivative order {order}")
        ax = frequency_axis(self.degree)
        if self.dim == 1:
            w = (2j * np.pi * ax) ** order[0]
        else:
            w = ((2j * np.pi * ax[:, None]) ** order[0]) * ((2j * np.pi * ax[None, :]) ** order[1])
        return PeriodicField(self.dim, self.degree, self.coeffs * w)

    def values(self, m: int | None = None) -> np.ndarray:
        return value_grid(self, m)


def sampling_grid(degree: int, oversample: int = 4, minimum: int = 16) -> int:
    """Points per axis used to sample a field of the given degree.

    A multiple of 4 so that quarter-period points (extrema of the lowest
    modes) land on the grid exactly.
    """
    m = max(int(minimum), int(oversample) * (int(degree) + 1))
    return _round4(m)


def value_grid(f: PeriodicField, m: int | None = None) -> np.ndarray:
    """Values of f on the uniform grid (j/m)_j, exact for m >= 2*degree+1."""
    if m is None:
        m = sampling_grid(f.degree)
    m = int(m)
    if m < 2 * f.degree + 1:
        raise ValueError("grid too coarse for the field's bandwidth")
    big = np.zeros((m,) * f.dim, dtype=np.complex128)
    ax = frequency_axis(f.degree) % m
    if f.dim == 1:
        big[ax] = f.coeffs
    else:
        big[np.ix_(ax, ax)] = f.coeffs
    vals = np.fft.ifftn(big) * (m ** f.dim)
    return np.ascontiguousarray(vals.real)


def field_from_grid(values: np.ndarray, degree: int) -> PeriodicField:
    """Project grid samples onto the l1 ball of the given degree.

    The grid must resolve the target band (m >= 2*degree+1 per axis); energy
    at box corners outside the ball is discarded by the field constructor.
    """
    values = np.asarray(values, dtype=float)
    dim = values.ndim
    m = values.shape[0]
    if any(s != m for s in values.shape):
        raise ValueError("grid must be square")
    if m < 2 * degree + 1:
        raise ValueError("grid too coarse for the requested degree")
    spec = np.fft.fftn(values) / (m ** dim)
    ax = frequency_axis(degree) % m
    box = spec[ax] if dim == 1 else spec[np.ix_(ax, ax)]
    return PeriodicField(dim, degree, box)


def eval_at_points(f: PeriodicField, points) -> np.ndarray | float:
    """Evaluate at arbitrary points; 1D accepts scalars or arrays, 2D arrays (..., 2)."""
    if f.dim == 1:
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 0
        x = np.atleast_1d(pts)
        out = np.zeros(x.shape, dtype=np.complex128)
        for k, c in f.entries():
            out += c * np.exp(2j * np.pi * k[0] * x)
        return float(out.real[0]) if scalar else out.real
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0 or pts.shape[-1] != 2:
        raise ValueError("2D evaluation needs points of shape (..., 2)")
    single = pts.ndim == 1
    p = np.atleast_2d(pts)
    out = np.zeros(p.shape[:-1], dtype=np.complex128)
    for k, c in f.entries():
        out += c * np.exp(2j * np.pi * (k[0] * p[..., 0] + k[1] * p[..., 1]))
    return float(out.real[0]) if single else out.real


def truncate(f: PeriodicField, cutoff: int, mode: str = "inhomogeneous") -> PeriodicField:
    """Split the spectrum at l1 radius `cutoff`.

    mode "inhomogeneous" keeps |k|_1 <= cutoff, "homogeneous" keeps
    0 < |k|_1 <= cutoff (dropping the mean), "tail" keeps |k|_1 > cutoff.
    The inhomogeneous and tail parts sum back to the original field exactly:
    the split is by index set, with no arithmetic on the coefficients.
    """
    cutoff = int(cutoff)
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    radii = _l1_radii(f.dim, f.degree)
    if mode == "tail":
        c = f.coeffs.copy()
        c[radii <= cutoff] = 0.0
        return PeriodicField(f.dim, f.degree, c)
    if mode not in ("inhomogeneous", "homogeneous"):
        raise ValueError(f"unknown truncation mode {mode!r}")
    c = f.coeffs.copy()
    c[radii > cutoff] = 0.0
    if mode == "homogeneous":
        c[(f.degree,) * f.dim] = 0.0
    deg = min(f.degree, cutoff)
    lo, hi = f.degree - deg, f.degree + deg + 1
    return PeriodicField(f.dim, deg, c[(slice(lo, hi),) * f.dim])


def _multi_orders(dim: int, s: int) -> list:
    if dim == 1:
        return [(t,) for t in range(s + 1)]
    return [(a, t - a) for t in range(s + 1) for a in range(t + 1)]


def cs_norm(f: PeriodicField, s: float = 0, method: str = "grid") -> float:
    """C^s norm proxy of a field.

    method "grid" takes the max over derivative orders |sigma| <= s of the sup
    on an oversampled grid (a lower bound on the true norm; integer s only).
    method "fourier" sums max(1, 2*pi*|k|_1)^s weighted coefficient magnitudes
    (an upper bound; any real s >= 0).  The two bracket the true norm.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    if method == "fourier":
        w = np.maximum(1.0, 2.0 * np.pi * _l1_radii(f.dim, f.degree)) ** float(s)
        return float(np.sum(w * np.abs(f.coeffs)))
    if method != "grid":
        raise ValueError(f"unknown norm method {method!r}")
    if s != int(s):
        raise ValueError("grid method needs integer s; use method='fourier'")
    m = sampling_grid(f.degree)
    best = 0.0
    for order in _multi_orders(f.dim, int(s)):
        g = f.derivative(order)
        best = max(best, float(np.max(np.abs(value_grid(g, m)))))
    return best


@dataclass(frozen=True, eq=False)
class TorusMapLift:
    """Lift x -> x + rho + u(x) of a torus self-map.

    The displacement components u_i are stored zero-mean; any constant part is
    folded into the translation `rho` on construction.
    """

    rho: np.ndarray
    displacement: tuple

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float)).copy()
        disp = tuple(self.displacement)
        if rho.size not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if len(disp) != rho.size:
            raise ValueError("need one displacement component per axis")
        fixed = []
        for i, u in enumerate(disp):
            if not isinstance(u, PeriodicField) or u.dim != rho.size:
                raise ValueError("displacement components must be fields of matching dimension")
            mu = u.mean()
            if mu != 0.0:
                rho[i] += mu
                u = u + (-mu)
            fixed.append(u)
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "displacement", tuple(fixed))

    @property
    def dim(self) -> int:
        return int(self.rho.size)

    @property
    def degree(self) -> int:
        return max(u.degree for u in self.displacement)

    @classmethod
    def rotation(cls, rho) -> "TorusMapLift":
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        zero = PeriodicField.zeros(rho.size, 0)
        return cls(rho, (zero,) * rho.size)

    @classmethod
    def identity(cls, dim: int) -> "TorusMapLift":
        return cls.rotation(np.zeros(dim))

    def __call__(self, points):
        if self.dim == 1:
            return np.asarray(points, dtype=float) + self.rho[0] + eval_at_points(self.displacement[0], points)
        pts = np.asarray(points, dtype=float)
        vals = np.stack(
            [np.atleast_1d(eval_at_points(u, pts)) for u in self.displacement], axis=-1
        )
        return pts + self.rho + vals.reshape(pts.shape)

    def displacement_values(self, m: int) -> tuple:
        return tuple(value_grid(u, m) for u in self.displacement)

    def jacobian_sup(self) -> float:
        """Sampled sup of the max row sum of the displacement Jacobian."""
        m = sampling_grid(self.degree)
        worst = None
        for u in self.displacement:
            row = np.zeros((m,) * self.dim)
            for j in range(self.dim):
                order = tuple(1 if a == j else 0 for a in range(self.dim))
                row = row + np.abs(value_grid(u.derivative(order), m))
            worst = row if worst is None else np.maximum(worst, row)
        return float(np.max(worst))


def rebase(f: TorusMapLift, alpha) -> TorusMapLift:
    """Shift the translation part by integers so rho - alpha lands in [-1/2, 1/2)^d."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    shift = np.floor(f.rho - alpha + 0.5)
    if not shift.any():
        return f
    return TorusMapLift(f.rho - shift, f.displacement)


def deviation_norm(f: TorusMapLift, alpha, s: float = 0, method: str = "grid") -> float:
    """C^s size of f minus the rotation by alpha, max over components.

    Uses the lift difference as given; rebase first if rho and alpha may
    differ by integers.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha.size != f.dim:
        raise ValueError("alpha does not match the map dimension")
    best = 0.0
    for i, u in enumerate(f.displacement):
        g = u + (f.rho[i] - alpha[i])
        best = max(best, cs_norm(g, s, method))
    return best


def _eval_displaced(f: PeriodicField, shift, v: tuple, m: int) -> np.ndarray:
    """Values of f at x_j + shift + v(x_j) over the m-point grid carrying v.

    Switches between a truncated expansion in powers of v (certified term
    count, used when 2*pi*degree*max|v| is small and the grid resolves f) and
    direct summation over the spectrum.
    """
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    vmax = max(float(np.max(np.abs(a))) if a.size else 0.0 for a in v)
    resolved = m >= 2 * f.degree + 1
    if vmax == 0.0 and resolved:
        return value_grid(f.shift(shift), m)
    rho_arg = 2.0 * np.pi * f.degree * vmax
    if rho_arg <= 3.0 and resolved:
        return _taylor_displaced(f, shift, v, m, rho_arg)
    return _direct_displaced(f, shift, v, m)


def _taylor_displaced(f, shift, v, m, rho_arg):
    # tail past order p is bounded by sum|c_k| * rho^p/p!; stop below 1e-17 relative
    p, term = 0, 1.0
    while term >= 1e-17 and p < 60:
        p += 1
        term *= rho_arg / p
    p = min(p + 2, 60)
    base = f.shift(shift)
    if f.dim == 1:
        acc = np.zeros(m)
        pw = np.ones(m)
        g = base
        for j in range(p + 1):
            if j:
                g = g.derivative(1)
                pw = pw * (v[0] / j)
            acc += value_grid(g, m) * pw
        return acc
    acc = np.zeros((m, m))
    gj = base
    a = np.ones((m, m))
    for j in range(p + 1):
        if j:
            gj = gj.derivative((1, 0))
            a = a * (v[0] / j)
        gl = gj
        b = np.ones((m, m))
        for l in range(p - j + 1):
            if l:
                gl = gl.derivative((0, 1))
                b = b * (v[1] / l)
            acc += value_grid(gl, m) * a * b
    return acc


def _direct_displaced(f, shift, v, m):
    """Exact spectral sum at the displaced points, factorized along axes.

    Hermitian symmetry halves the frequency range of the outer axis (Horner
    in its unit phase); the inner axis is contracted against the coefficient
    box blockwise, so the cost is dense matrix products rather than a loop
    over individual modes.
    """
    deg = f.degree
    width = 2 * deg + 1
    ax = np.arange(m) / m
    if f.dim == 1:
        x = ax + shift[0] + v[0]
        z = np.exp(2j * np.pi * x)
        acc = np.zeros(x.shape, dtype=np.complex128)
        for i in range(2 * deg, deg, -1):  # k = deg .. 1
            acc = (acc + f.coeffs[i]) * z
        return (acc + acc.conj() + f.coeffs[deg]).real
    x1 = (ax[:, None] + shift[0] + v[0]).ravel()
    x2 = (ax[None, :] + shift[1] + v[1]).ravel()
    n = x1.size
    if (deg + 1) * width * n > 2e11:
        warnings.warn("displaced evaluation over a very large spectrum/grid", RuntimeWarning)
    half = f.coeffs[deg:, :]  # rows k1 = 0 .. deg
    out = np.empty(n, dtype=float)
    block = max(1, int(3e6) // width)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        zb2 = np.exp(2j * np.pi * x2[lo:hi])
        p2 = np.empty((width, hi - lo), dtype=np.complex128)
        p2[0] = np.exp(-2j * np.pi * deg * x2[lo:hi])
        for i in range(1, width):
            np.multiply(p2[i - 1], zb2, out=p2[i])
        rows = half @ p2  # rows[j] = sum_k2 c[j, k2] z2^k2 for k1 = j
        zb1 = np.exp(2j * np.pi * x1[lo:hi])
        acc = np.zeros(hi - lo, dtype=np.complex128)
        for j in range(deg, 0, -1):
            acc = (acc + rows[j]) * zb1
        out[lo:hi] = (acc + acc.conj() + rows[0]).real
    return out.reshape(m, m)


def compose(g: TorusMapLift, f: TorusMapLift, target_degree: int | None = None) -> TorusMapLift:
    """Compose lifts, returning the band-limited projection of g after f.

    The composed displacement is generally not band-limited; it is sampled
    pointwise on an oversampled grid and projected once at `target_degree`
    (default: the sum of the two degrees).  Asking for less warns.
    """
    if g.dim != f.dim:
        raise ValueError("dimension mismatch")
    full = g.degree + f.degree
    target = full if target_degree is None else int(target_degree)
    if target < full:
        warnings.warn(
            "target degree below the combined bandwidth; spectrum will be clipped",
            AliasingRisk,
        )
    m = _round4(max(sampling_grid(target), 2 * f.degree + 2, 2 * g.degree + 2))
    vf = f.displacement_values(m)
    disp = [vf[i] + _eval_displaced(g.displacement[i], f.rho, vf, m) for i in range(f.dim)]
    fields = tuple(field_from_grid(a, target) for a in disp)
    return TorusMapLift(f.rho + g.rho, fields)


def _inversion_residuals(phi: TorusMapLift, psi: TorusMapLift, m: int) -> tuple:
    d = phi.dim
    wv = psi.displacement_values(m)
    u_at = [_eval_displaced(u, psi.rho, wv, m) for u in phi.displacement]
    r1 = max(
        float(np.max(np.abs(psi.rho[i] + wv[i] + phi.rho[i] + u_at[i]))) for i in range(d)
    )
    uv = phi.displacement_values(m)
    w_at = [_eval_displaced(w, phi.rho, uv, m) for w in psi.displacement]
    r2 = max(
        float(np.max(np.abs(phi.rho[i] + uv[i] + psi.rho[i] + w_at[i]))) for i in range(d)
    )
    return r1, r2


def invert_near_identity(
    phi: TorusMapLift,
    tol: float = 1e-12,
    max_sweeps: int = 100,
    degree: int | None = None,
    max_degree: int | None = None,
) -> TorusMapLift:
    """Invert a lift that is a small perturbation of a translation.

    Runs the fixed-point iteration w <- -u(y - rho + w) on a sampling grid,
    projects onto a band, and verifies both composition residuals against
    `tol`, doubling the projection degree (up to `max_degree`) as needed.
    Raises NotContractive when the displacement is too steep for the
    iteration to contract, NoConvergence when the residuals cannot be met.
    """
    d = phi.dim
    if phi.jacobian_sup() >= 0.5:
        raise NotContractive("displacement Jacobian reaches 1/2; refusing to invert")
    deg_p = max(phi.degree, 4) if degree is None else max(int(degree), 1)
    cap = max(4 * max(phi.degree, 4), 64) if max_degree is None else int(max_degree)
    cap = max(cap, deg_p)
    shift = -phi.rho
    while True:
        m = _round4(max(sampling_grid(deg_p), 2 * phi.degree + 2))
        w = tuple(np.zeros((m,) * d) for _ in range(d))
        best = math.inf
        stagnant = 0
        for _ in range(max_sweeps):
            uvals = [_eval_displaced(u, shift, w, m) for u in phi.displacement]
            defect = max(float(np.max(np.abs(w[i] + uvals[i]))) for i in range(d))
            w = tuple(-uvals[i] for i in range(d))
            if defect <= 0.2 * tol:
                break
            if defect >= 0.9 * best:
                stagnant += 1
                if stagnant >= 5:
                    break
            else:
                stagnant = 0
            best = min(best, defect)
        fields = tuple(field_from_grid(w[i], deg_p) for i in range(d))
        psi = TorusMapLift(shift, fields)
        r1, r2 = _inversion_residuals(phi, psi, m)
        if max(r1, r2) <= tol:
            return psi
        if deg_p >= cap:
            raise NoConvergence(
                f"inverse residual {max(r1, r2):.3e} above tolerance {tol:.1e} at degree {deg_p}"
            )
        deg_p = min(2 * deg_p, cap)


def conjugate(
    phi: TorusMapLift,
    f: TorusMapLift,
    target_degree: int | None = None,
    invert_tol: float = 1e-12,
) -> TorusMapLift:
    """Push f forward by phi: the inverse of phi, then f, then phi on top.

    The three maps are chained pointwise on a single oversampled grid and the
    result is projected once at `target_degree` (default: the larger of the
    two degrees), so no intermediate truncation error is introduced.
    """
    if phi.dim != f.dim:
        raise ValueError("dimension mismatch")
    d = f.dim
    psi = invert_near_identity(phi, tol=invert_tol)
    target = max(f.degree, phi.degree) if target_degree is None else int(target_degree)
    m = _round4(
        max(
            sampling_grid(target),
            2 * f.degree + 2,
            2 * phi.degree + 2,
            2 * psi.degree + 2,
        )
    )
    upsi = psi.displacement_values(m)
    uf_at = [_eval_displaced(u, psi.rho, upsi, m) for u in f.displacement]
    mid = tuple(upsi[i] + uf_at[i] for i in range(d))
    shift2 = psi.rho + f.rho
    uphi_at = [_eval_displaced(v, shift2, mid, m) for v in phi.displacement]
    fields = tuple(field_from_grid(mid[i] + uphi_at[i], target) for i in range(d))
    return TorusMapLift(shift2 + phi.rho, fields)
