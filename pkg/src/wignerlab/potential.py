"""Measures on the real line, logarithmic potentials and distances.

Atomic measures are equal-weight sums of Dirac masses. The semicircle law
``SEMICIRCLE`` is handled in closed form wherever possible. Three distances
against either kind of measure are provided:

* :func:`dist_potential` -- L1 norm of the potential difference w.r.t. the
  Fubini-Study area form of the Riemann sphere,
* :func:`w1_distance` -- Wasserstein-1 distance, ``int |F - G| dx``,
* :func:`interval_discrepancy` -- ``sup_I |mu(I) - nu(I)|`` over intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "AtomicMeasure",
    "SemicircleLaw",
    "SEMICIRCLE",
    "IntervalQuery",
    "QuadratureError",
    "sc_density",
    "sc_cdf",
    "sc_cdf_integral",
    "sc_quantile",
    "inverse_joukowski",
    "sc_potential",
    "log_potential",
    "fs_density",
    "dist_potential",
    "dist_potential_with_error",
    "w1_distance",
    "interval_discrepancy",
    "interval_mass",
    "chebyshev_grid",
    "potential_gap",
    "mass_outside",
]


class QuadratureError(ArithmeticError):
    """Adaptive quadrature hit its refinement cap before reaching tolerance."""

    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Uniform probability measure on ``n`` real atoms (kept sorted)."""

    atoms: np.ndarray

    def __init__(self, atoms):
        arr = np.sort(np.asarray(atoms, dtype=float).ravel())
        if arr.size == 0:
            raise ValueError("an atomic measure needs at least one atom")
        if not np.all(np.isfinite(arr)):
            raise ValueError("atoms must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "atoms", arr)

    @property
    def n(self) -> int:
        return self.atoms.size

    def __len__(self):
        return self.atoms.size

    def __eq__(self, other):
        if not isinstance(other, AtomicMeasure):
            return NotImplemented
        return np.array_equal(self.atoms, other.atoms)

    def __hash__(self):
        return hash(self.atoms.tobytes())

    def __repr__(self):
        return f"AtomicMeasure(n={self.n}, atoms={self.atoms!r})"

    def cdf(self, x, left=False):
        """``mu((-inf, x])``, or ``mu((-inf, x))`` when ``left`` is set."""
        side = "left" if left else "right"
        return np.searchsorted(self.atoms, x, side=side) / self.n

    def to_text(self) -> str:
        """Newline-delimited atoms at 17 significant digits."""
        return "".join(f"{a:.17g}\n" for a in self.atoms)

    @classmethod
    def from_text(cls, text: str) -> "AtomicMeasure":
        return cls([float(line) for line in text.split() if line.strip()])

    @classmethod
    def semicircle_quantiles(cls, n: int) -> "AtomicMeasure":
        """Atoms at the semicircle quantiles ``(k - 1/2) / n``."""
        return cls(sc_quantile((np.arange(n) + 0.5) / n))


class SemicircleLaw:
    """The semicircle law on [-2, 2]; use the singleton ``SEMICIRCLE``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "SEMICIRCLE"

    def cdf(self, x, left=False):
        return sc_cdf(x)


SEMICIRCLE = SemicircleLaw()

Measure = Union[AtomicMeasure, SemicircleLaw]


@dataclass(frozen=True)
class IntervalQuery:
    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = True

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError("interval needs lo <= hi")


# --- semicircle in closed form -------------------------------------------


def sc_density(x):
    """Semicircle density ``sqrt((4 - x^2)_+) / (2 pi)``."""
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.maximum(4.0 - x * x, 0.0)) / (2.0 * np.pi)
    return out[()] if out.ndim == 0 else out


def sc_cdf(x):
    """Semicircle distribution function."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    out = 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi
    out = np.clip(out, 0.0, 1.0)
    return out[()] if out.ndim == 0 else out


def sc_cdf_integral(x):
    """``int_{-2}^{x} sc_cdf(t) dt`` in closed form; equals ``x`` for x >= 2."""
    x = np.asarray(x, dtype=float)
    c = np.clip(x, -2.0, 2.0)
    root = np.sqrt(4.0 - c * c)
    g = c / 2.0 - root ** 3 / (12.0 * np.pi) + (c * np.arcsin(c / 2.0) + root) / np.pi
    g = g + np.maximum(x - 2.0, 0.0)
    return g[()] if g.ndim == 0 else g


def sc_quantile(q):
    """Inverse of :func:`sc_cdf` on (0, 1), by bisection to full precision."""
    q = np.asarray(q, dtype=float)
    lo = np.full(q.shape, -2.0)
    hi = np.full(q.shape, 2.0)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = sc_cdf(mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return out[()] if out.ndim == 0 else out


def inverse_joukowski(z):
    """The preimage ``w`` of ``z`` under ``w + 1/w`` with ``|w| <= 1``.

    On the segment [-2, 2] both preimages lie on the unit circle; the one
    with nonnegative imaginary part is returned.
    """
    z = np.asarray(z, dtype=complex)
    s = np.sqrt(z - 2.0) * np.sqrt(z + 2.0)
    w = 2.0 / (z + s)
    on_cut = (z.imag == 0.0) & (np.abs(z.real) <= 2.0)
    w = np.where(on_cut & (w.imag < 0.0), np.conj(w), w)
    return w[()] if w.ndim == 0 else w


def sc_potential(z):
    """Logarithmic potential of the semicircle law at complex ``z``."""
    w = inverse_joukowski(z)
    w = np.asarray(w)
    aw = np.abs(w)
    with np.errstate(divide="ignore"):
        out = 0.5 * (w * w).real - np.log(aw)
    # exact value on the segment, where |w| = 1 only up to rounding
    z = np.asarray(z, dtype=complex)
    seg = (z.imag == 0.0) & (np.abs(z.real) <= 2.0)
    out = np.where(seg, (z.real ** 2 - 2.0) / 4.0, out)
    return out[()] if out.ndim == 0 else out


# --- general potentials ---------------------------------------------------


def log_potential(mu: AtomicMeasure, z, chunk: int = 1 << 20):
    """``(1/n) sum_k log|z - a_k|``; ``-inf`` exactly at an atom."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    atoms = mu.atoms
    out = np.empty(flat.size)
    step = max(1, chunk // max(atoms.size, 1))
    with np.errstate(divide="ignore"):
        for start in range(0, flat.size, step):
            zz = flat[start:start + step]
            dx = zz.real[:, None] - atoms[None, :]
            r2 = dx * dx + (zz.imag * zz.imag)[:, None]
            out[start:start + step] = 0.5 * np.log(r2).mean(axis=1)
    out = out.reshape(z.shape)
    return out[()] if out.ndim == 0 else out


def _potential(measure: Measure, z):
    if isinstance(measure, SemicircleLaw):
        return sc_potential(z)
    return log_potential(measure, z)


def fs_density(z):
    """Fubini-Study area density ``(1 + |z|^2)^-2 / pi`` on the plane."""
    z = np.asarray(z, dtype=complex)
    out = 1.0 / (np.pi * (1.0 + np.abs(z) ** 2) ** 2)
    return out[()] if out.ndim == 0 else out


# --- potential L1 distance ------------------------------------------------

_GL_ORDER = 6
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def _panel_nodes(ph0, ph1, th0, th1):
    """Tensor Gauss-Legendre nodes/weights for a batch of panels."""
    hp = 0.5 * (ph1 - ph0)
    ht = 0.5 * (th1 - th0)
    cp = 0.5 * (ph1 + ph0)
    ct = 0.5 * (th1 + th0)
    phi = cp[:, None, None] + hp[:, None, None] * _GL_X[None, :, None]
    theta = ct[:, None, None] + ht[:, None, None] * _GL_X[None, None, :]
    wts = (hp * ht)[:, None, None] * (_GL_W[:, None] * _GL_W[None, :])[None]
    return phi, theta, wts


def _panel_integrals(f, ph0, ph1, th0, th1):
    phi, theta, wts = _panel_nodes(ph0, ph1, th0, th1)
    vals = f(phi, theta)
    return np.einsum("kij,kij->k", vals, wts)


def dist_potential_with_error(mu: Measure, against: Measure, tol: float = 1e-8,
                              floor: float = 1e-6, max_panels: int = 4_000_000):
    """Potential L1 distance and its adaptive-quadrature error estimate.

    The integral over the sphere is taken in the coordinates
    ``z = tan(phi / 2) exp(i theta)``, where the Fubini-Study form becomes
    ``sin(phi) dphi dtheta / (4 pi)`` on the compact rectangle
    [0, pi] x [0, 2 pi]. Both measures are real, so only the upper half
    ``theta in [0, pi]`` is integrated and doubled; log singularities sit on
    the edges ``theta = 0, pi`` and panels touching them are refined down to
    ``floor``.
    """
    if mu is against or (isinstance(mu, AtomicMeasure) and mu == against):
        return 0.0, 0.0
    if isinstance(mu, SemicircleLaw) and isinstance(against, SemicircleLaw):
        return 0.0, 0.0

    def integrand(phi, theta):
        r = np.tan(0.5 * phi)
        z = r * np.exp(1j * theta)
        diff = np.abs(_potential(mu, z) - _potential(against, z))
        return diff * np.sin(phi) / (2.0 * np.pi)

    k0 = 8
    edges_p = np.linspace(0.0, np.pi, k0 + 1)
    edges_t = np.linspace(0.0, np.pi, k0 + 1)
    P0, T0 = np.meshgrid(edges_p[:-1], edges_t[:-1], indexing="ij")
    P1, T1 = np.meshgrid(edges_p[1:], edges_t[1:], indexing="ij")
    ph0, ph1, th0, th1 = (a.ravel() for a in (P0, P1, T0, T1))
    values = _panel_integrals(integrand, ph0, ph1, th0, th1)
    total_area = np.pi * np.pi

    accepted = []
    accepted_err = []
    evaluated = ph0.size
    while ph0.size:
        pm = 0.5 * (ph0 + ph1)
        tm = 0.5 * (th0 + th1)
        c_ph0 = np.concatenate([ph0, pm, ph0, pm])
        c_ph1 = np.concatenate([pm, ph1, pm, ph1])
        c_th0 = np.concatenate([th0, th0, tm, tm])
        c_th1 = np.concatenate([tm, tm, th1, th1])
        child = _panel_integrals(integrand, c_ph0, c_ph1, c_th0, c_th1)
        evaluated += child.size
        m = ph0.size
        child4 = child.reshape(4, m)
        refined = child4.sum(axis=0)
        err = np.abs(refined - values)
        area = (ph1 - ph0) * (th1 - th0)
        done = (err <= tol * area / total_area) | ((ph1 - ph0) < floor)
        accepted.append(refined[done])
        accepted_err.append(err[done])
        keep = ~done
        if not keep.any():
            break
        if evaluated > max_panels:
            achieved = float(np.sum(np.concatenate(accepted_err)) + err[keep].sum())
            raise QuadratureError("potential distance quadrature did not converge", achieved)
        sel = np.concatenate([keep] * 4)
        ph0, ph1, th0, th1 = c_ph0[sel], c_ph1[sel], c_th0[sel], c_th1[sel]
        values = child[sel]
    acc = np.concatenate(accepted)
    # fixed-order summation: sort by value magnitude is order-dependent on
    # refinement history only, which is itself deterministic
    total = math.fsum(acc.tolist())
    return total, float(np.sum(np.concatenate(accepted_err)))


def dist_potential(mu: Measure, against: Measure, tol: float = 1e-8) -> float:
    """``int_{P^1} |u_mu - u_nu| omega_FS`` between two real measures."""
    return dist_potential_with_error(mu, against, tol=tol)[0]


# --- Wasserstein-1 and interval discrepancy -------------------------------


def _w1_atomic_atomic(mu: AtomicMeasure, nu: AtomicMeasure) -> float:
    pts = np.union1d(mu.atoms, nu.atoms)
    if pts.size < 2:
        return 0.0
    diff = np.abs(mu.cdf(pts[:-1]) - nu.cdf(pts[:-1]))
    return math.fsum((diff * np.diff(pts)).tolist())


def _w1_atomic_sc(mu: AtomicMeasure) -> float:
    a = mu.atoms
    n = a.size
    # breakpoints: -inf .. a_1 .. a_n .. +inf; F_mu = k/n on (a_k, a_{k+1})
    lo = np.concatenate([[min(a[0], -2.0)], a])
    hi = np.concatenate([a, [max(a[-1], 2.0)]])
    level = np.arange(n + 1) / n
    # crossing point where sc_cdf equals the level, clipped into the piece
    q = np.where(level <= 0.0, -2.0, np.where(level >= 1.0, 2.0, sc_quantile(np.clip(level, 1e-300, 1.0))))
    x = np.clip(q, lo, hi)
    G = sc_cdf_integral
    # on [lo, x]: level >= F ; on [x, hi]: F >= level
    left = level * (x - lo) - (G(x) - G(lo))
    right = (G(hi) - G(x)) - level * (hi - x)
    pieces = np.maximum(left, 0.0) + np.maximum(right, 0.0)
    return math.fsum(pieces.tolist())


def w1_distance(mu: Measure, against: Measure) -> float:
    """Wasserstein-1 distance ``int |F_mu - F_nu| dx``, exact piecewise."""
    if isinstance(mu, SemicircleLaw):
        mu, against = against, mu
    if isinstance(mu, SemicircleLaw):
        return 0.0
    if isinstance(against, SemicircleLaw):
        return _w1_atomic_sc(mu)
    return _w1_atomic_atomic(mu, against)


def interval_mass(measure: Measure, query: IntervalQuery) -> float:
    """Mass of an interval with the given endpoint closedness."""
    if isinstance(measure, SemicircleLaw):
        return float(sc_cdf(query.hi) - sc_cdf(query.lo))
    hi = measure.cdf(query.hi, left=not query.closed_hi)
    lo = measure.cdf(query.lo, left=query.closed_lo)
    return float(max(hi - lo, 0.0))


def _cdf_trace(mu: Measure, against: Measure):
    """Values of D = F_mu - F_nu from the left and right at every atom."""
    pts = []
    for m in (mu, against):
        if isinstance(m, AtomicMeasure):
            pts.append(m.atoms)
    x = np.unique(np.concatenate(pts))
    right = mu.cdf(x) - against.cdf(x)
    left = mu.cdf(x, left=True) - against.cdf(x, left=True)
    return left, right


def interval_discrepancy(mu: Measure, against: Measure = SEMICIRCLE) -> float:
    """``sup_I |mu(I) - nu(I)|`` over all intervals I of the real line.

    With ``D = F_mu - F_nu`` read off at each atom from both sides (and as
    0 at +-inf), every interval mass difference is ``D(b*) - D(a*)`` for two
    such readings in left-to-right order. A single scan keeps the running
    minimum and maximum of the readings seen so far.
    """
    if isinstance(mu, SemicircleLaw):
        mu, against = against, mu
    if isinstance(mu, SemicircleLaw):
        return 0.0
    left, right = _cdf_trace(mu, against)
    seq = np.empty(2 * left.size + 2)
    seq[0] = 0.0
    seq[1:-1:2] = left
    seq[2:-1:2] = right
    seq[-1] = 0.0
    best_up = 0.0
    best_down = 0.0
    run_min = run_max = seq[0]
    for v in seq[1:].tolist():
        best_up = max(best_up, v - run_min)
        best_down = max(best_down, run_max - v)
        run_min = min(run_min, v)
        run_max = max(run_max, v)
    return float(min(max(best_up, best_down), 1.0))


# --- potential gap and masses ---------------------------------------------


def chebyshev_grid(count: int = 4096, lo: float = -2.0, hi: float = 2.0) -> np.ndarray:
    """Chebyshev-Lobatto points on [lo, hi], endpoints included, ascending."""
    k = np.arange(count)
    x = -np.cos(np.pi * k / (count - 1))
    return lo + (hi - lo) * (x + 1.0) / 2.0


_DEFAULT_GRID = chebyshev_grid()


def potential_gap(mu: AtomicMeasure, grid=None) -> float:
    """``max_grid (u_mu - u_sc)`` over real grid points in [-2, 2].

    Grid points that coincide with an atom give ``-inf`` and drop out of
    the maximum on their own.
    """
    grid = _DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty grid")
    if np.any(np.abs(grid) > 2.0):
        raise ValueError("grid points must lie in [-2, 2]")
    gap = log_potential(mu, grid.astype(complex)) - (grid * grid - 2.0) / 4.0
    return float(np.max(gap))


def mass_outside(mu: AtomicMeasure, lo: float, hi: float) -> float:
    """Fraction of atoms strictly outside [lo, hi]."""
    if lo > hi:
        raise ValueError("need lo <= hi")
    inside = np.searchsorted(mu.atoms, hi, side="right") - np.searchsorted(mu.atoms, lo, side="left")
    return float((mu.n - inside) / mu.n)
