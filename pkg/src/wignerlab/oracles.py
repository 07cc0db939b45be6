"""Exact small-scale checks: Hermite identities, cycle counts, R-sums and
polynomial inequalities.

The R-sums expand ``|P_{M[0]}(z)|^2`` over pairs of fixed-point-free
permutations ``(sigma, sigma')`` of subsets ``I, I'`` and take expectations
term by term from independence of the entries. Everything here is exact or
enumerative; nothing is sampled except the random inputs to the ratio
checks.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .ensembles import EntryDistribution, enumerate_symmetric_rademacher, moments_of

__all__ = [
    "hermite",
    "hermite_log",
    "hermite_explicit",
    "hermite_bound_ratio",
    "expected_charpoly_zero_diag",
    "exhaustive_expectation",
    "stirling_cycle_count",
    "cycle_count_distribution",
    "cycle_bound_check",
    "MomentModel",
    "R_KINDS",
    "partial_sum_R",
    "partial_sum_R_polynomial",
    "r_term_count",
    "PolynomialR",
    "graph_grid",
    "markov_ratio",
    "net_sup_ratio",
]


# --- Hermite polynomials (physicists') ------------------------------------


def hermite(n: int, z):
    """``H_n(z)`` from ``H_{k+1} = 2z H_k - 2k H_{k-1}``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n > 400:
        raise OverflowError("use hermite_log for n > 400")
    z = np.asarray(z, dtype=float)
    h_prev = np.ones_like(z)
    if n == 0:
        return h_prev[()] if h_prev.ndim == 0 else h_prev
    h = 2.0 * z
    for k in range(1, n):
        h_prev, h = h, 2.0 * z * h - 2.0 * k * h_prev
    return h[()] if h.ndim == 0 else h


def hermite_log(n: int, z):
    """``(sign, log|H_n(z)|)`` with the recurrence rescaled as it runs."""
    z = np.asarray(z, dtype=float)
    logscale = np.zeros_like(z)
    h_prev = np.ones_like(z)
    if n == 0:
        return np.ones_like(z), logscale
    h = 2.0 * z
    for k in range(1, n):
        h_prev, h = h, 2.0 * z * h - 2.0 * k * h_prev
        big = np.maximum(np.abs(h), np.abs(h_prev))
        rescale = big > 1e100
        if np.any(rescale):
            s = np.where(rescale, big, 1.0)
            h = h / s
            h_prev = h_prev / s
            logscale = logscale + np.log(s)
    with np.errstate(divide="ignore"):
        return np.sign(h), logscale + np.log(np.abs(h))


def hermite_explicit(n: int, z: float) -> float:
    """``sum_k (-1)^k n! / (k! (n-2k)!) (2z)^(n-2k)``, summed exactly in rationals."""
    zq = Fraction(z)
    total = Fraction(0)
    for k in range(n // 2 + 1):
        total += Fraction((-1) ** k * math.factorial(n), math.factorial(k) * math.factorial(n - 2 * k)) * (2 * zq) ** (n - 2 * k)
    return float(total)


def hermite_bound_ratio(n: int, z, hermite_fn=None):
    """``|H_n(sqrt(n/2) z)| / ((2n)^((n+1)/2) exp(n (z^2/4 - 1/2)))``, in log space."""
    if n < 1:
        raise ValueError("need n >= 1")
    z = np.asarray(z, dtype=float)
    x = math.sqrt(n / 2.0) * z
    if hermite_fn is None:
        _, logh = hermite_log(n, x)
    else:
        with np.errstate(divide="ignore"):
            logh = np.log(np.abs(hermite_fn(n, x)))
    logb = 0.5 * (n + 1) * math.log(2.0 * n) + n * (z * z / 4.0 - 0.5)
    out = np.exp(logh - logb)
    return out[()] if out.ndim == 0 else out


def expected_charpoly_zero_diag(n: int, z, hermite_fn=hermite):
    """``E det(z - M_n[0]) = 2^{-n/2} H_n(z / sqrt 2)`` for unit-variance entries."""
    if n < 1:
        raise ValueError("need n >= 1")
    return 2.0 ** (-n / 2.0) * hermite_fn(n, np.asarray(z, dtype=float) / math.sqrt(2.0))


def exhaustive_expectation(n: int, f, zero_diagonal: bool = True) -> complex:
    """Exact average of ``f`` over every symmetric Rademacher matrix of size n."""
    re, im = [], []
    for m in enumerate_symmetric_rademacher(n, zero_diagonal):
        v = complex(f(m))
        re.append(v.real)
        im.append(v.imag)
    count = len(re)
    return complex(math.fsum(re) / count, math.fsum(im) / count)


# --- cycle counts ---------------------------------------------------------


@lru_cache(maxsize=None)
def _stirling_row(n: int) -> tuple:
    row = [1]  # c(0, 0)
    for m in range(1, n + 1):
        new = [0] * (m + 1)
        for l in range(1, m + 1):
            new[l] = (row[l - 1] if l - 1 < len(row) else 0) + (m - 1) * (row[l] if l < len(row) else 0)
        row = new
    return tuple(row)


def stirling_cycle_count(n: int, l: int) -> int:
    """Unsigned Stirling number of the first kind ``c(n, l)``."""
    if not 1 <= l <= n:
        raise ValueError("need 1 <= l <= n")
    if n > 20:
        raise ValueError("n is limited to 20")
    return _stirling_row(n)[l]


def _cycles(perm) -> list:
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = perm[i]
        out.append(tuple(cyc))
    return out


def cycle_count_distribution(n: int) -> Counter:
    """Brute force: number of permutations of n points with each cycle count."""
    return Counter(len(_cycles(p)) for p in itertools.permutations(range(n)))


def cycle_bound_check(n: int, l: int):
    """``(c(n, l), 2 n n! 2^-l, holds)`` with the bound as an exact rational."""
    lhs = stirling_cycle_count(n, l)
    rhs = Fraction(2 * n * math.factorial(n), 2 ** l)
    return lhs, rhs, lhs <= rhs


# --- R-sums ---------------------------------------------------------------


@dataclass(frozen=True)
class MomentModel:
    """Per-entry moments feeding the pair-moment expectation.

    Only the real symmetric case is supported: a pair ``{i, j}`` used ``d``
    times contributes 1, 0, ``off_e2``, 0 or ``off_abs4`` for ``d = 0..4``
    (odd moments are taken to vanish).
    """

    off_e2: float = 1.0
    off_abs4: float = 1.0
    off_m2: float = 1.0
    diag_m2: float = 0.0
    real_symmetric: bool = True

    def __post_init__(self):
        if self.off_m2 != 1.0:
            raise ValueError("off-diagonal variance must be 1")
        if abs(self.off_e2) > self.off_m2:
            raise ValueError("|E xi^2| cannot exceed E|xi|^2")
        if self.off_abs4 < self.off_m2 ** 2:
            raise ValueError("E|xi|^4 cannot be below (E|xi|^2)^2")

    @classmethod
    def rademacher(cls):
        return cls(1.0, 1.0)

    @classmethod
    def from_distribution(cls, offdiag: EntryDistribution, diag: EntryDistribution | None = None):
        mo = moments_of(offdiag)
        if offdiag.is_complex:
            raise ValueError("the R-sum oracle covers real symmetric entries only")
        d2 = 0.0 if diag is None else moments_of(diag).variance
        return cls(off_e2=float(np.real(mo.second_moment)), off_abs4=mo.abs_fourth_moment, diag_m2=d2)


R_KINDS = ("R0", "R1", "R2", "R3")


@dataclass(frozen=True)
class _PermInfo:
    size: int  # |I|, number of non-fixed points
    sign: int  # (-1)^{|I| + sign(sigma)}
    two_cycles: frozenset
    long_cycles: frozenset  # oriented, rotated to start at the minimum
    only_two: bool
    edges: tuple  # (pair, multiplicity)


def _canonical(cyc):
    k = cyc.index(min(cyc))
    return cyc[k:] + cyc[:k]


@lru_cache(maxsize=None)
def _derangement_infos(n: int) -> tuple:
    infos = []
    for perm in itertools.permutations(range(n)):
        cycles = [c for c in _cycles(perm) if len(c) > 1]
        size = sum(len(c) for c in cycles)
        parity = sum(len(c) - 1 for c in cycles)
        two = frozenset(frozenset(c) for c in cycles if len(c) == 2)
        long_ = frozenset(_canonical(c) for c in cycles if len(c) > 2)
        edges = Counter()
        for i in range(n):
            if perm[i] != i:
                edges[frozenset((i, perm[i]))] += 1
        infos.append(_PermInfo(size, (-1) ** (size + parity), two, long_, not long_, tuple(edges.items())))
    return tuple(infos)


def _reverse(cyc):
    return _canonical(tuple(reversed(cyc)))


def _mirrored(a: _PermInfo, b: _PermInfo) -> bool:
    for w in a.long_cycles:
        if w not in b.long_cycles and _reverse(w) not in b.long_cycles:
            return False
    for w in b.long_cycles:
        if w not in a.long_cycles and _reverse(w) not in a.long_cycles:
            return False
    return True


def _in_class(kind: str, a: _PermInfo, b: _PermInfo) -> bool:
    if kind == "R3":
        return True
    if a.two_cycles & b.two_cycles:
        return False
    if kind == "R2":
        return True
    if kind == "R1":
        return _mirrored(a, b)
    return a.only_two and b.only_two


def _pair_moment_key(a: _PermInfo, b: _PermInfo):
    deg = Counter(dict(a.edges))
    for e, k in b.edges:
        deg[e] += k
    twos = fours = 0
    for d in deg.values():
        if d % 2:
            return None
        if d == 2:
            twos += 1
        elif d == 4:
            fours += 1
    return twos, fours


@lru_cache(maxsize=None)
def partial_sum_R_polynomial(kind: str, n: int) -> tuple:
    """Exact expectation of an R-sum as integer coefficients.

    Returns sorted ``((power, twos, fours), coeff)`` items meaning
    ``sum coeff * z^power * off_e2^twos * off_abs4^fours``.
    """
    if kind not in R_KINDS:
        raise ValueError(f"kind must be one of {R_KINDS}")
    if not 1 <= n <= 5:
        raise ValueError("exact R-sums are limited to 1 <= n <= 5")
    infos = _derangement_infos(n)
    acc = defaultdict(int)
    for a in infos:
        for b in infos:
            if not _in_class(kind, a, b):
                continue
            key = _pair_moment_key(a, b)
            if key is None:
                continue
            acc[(2 * n - a.size - b.size,) + key] += a.sign * b.sign
    return tuple(sorted((k, v) for k, v in acc.items() if v))


def r_term_count(kind: str, n: int) -> int:
    """Number of ``(I, I', sigma, sigma')`` quadruples in an R-class."""
    infos = _derangement_infos(n)
    return sum(1 for a in infos for b in infos if _in_class(kind, a, b))


def partial_sum_R(kind: str, n: int, z: float, m: MomentModel = MomentModel()) -> float:
    """Exact ``E(R^[kind]_{M_n}(z))`` for real ``z`` under moment model ``m``."""
    if not m.real_symmetric:
        raise ValueError("the R-sum oracle covers real symmetric entries only")
    terms = partial_sum_R_polynomial(kind, n)
    vals = [c * z ** p * m.off_e2 ** t * m.off_abs4 ** f for (p, t, f), c in terms]
    return math.fsum(vals)


# --- polynomial inequalities ----------------------------------------------


class PolynomialR:
    """Polynomial with ascending coefficients."""

    def __init__(self, coefficients, roots=None):
        c = np.trim_zeros(np.asarray(coefficients, dtype=complex), "b")
        if c.size == 0:
            raise ValueError("zero polynomial")
        self.coefficients = c if np.any(c.imag) else c.real.copy()
        self.roots = None if roots is None else np.asarray(roots)

    @classmethod
    def from_roots(cls, roots):
        """Monic polynomial with the given roots; evaluated as a product."""
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.concatenate([[0.0], c]) - r * np.concatenate([c, [0.0]])
        return cls(c, roots=roots)

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def derivative(self) -> "PolynomialR":
        if self.degree == 0:
            raise ValueError("derivative of a constant is the zero polynomial")
        d = PolynomialR(self.coefficients[1:] * np.arange(1, self.degree + 1))
        if self.roots is not None:
            # monomial coefficients of a high degree product lose every digit
            # to cancellation, so differentiate the product instead
            d._factor_roots = self.roots
        return d

    _factor_roots = None

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self._factor_roots is not None:
            p = np.ones(z.shape, dtype=complex)
            dp = np.zeros(z.shape, dtype=complex)
            for r in self._factor_roots:
                dp = dp * (z - r) + p
                p = p * (z - r)
            return dp
        if self.roots is not None:
            acc = np.ones(z.shape, dtype=complex)
            for r in self.roots:
                acc = acc * (z - r)
            return acc
        acc = np.full(z.shape, self.coefficients[-1], dtype=complex)
        for c in self.coefficients[-2::-1]:
            acc = acc * z + c
        return acc


def graph_grid(f=None, count: int = 4096) -> np.ndarray:
    """Points ``x + i f(x)`` on the graph of ``f`` over [0, 1] (flat by default)."""
    x = np.linspace(0.0, 1.0, count)
    y = np.zeros_like(x) if f is None else np.asarray(f(x), dtype=float)
    return x + 1j * y


def markov_ratio(Q: PolynomialR, grid) -> float:
    """``max |Q'| / (n^2 max |Q|)`` over the grid points."""
    n = Q.degree
    if n < 1:
        raise ValueError("need degree >= 1")
    grid = np.asarray(grid, dtype=complex)
    top = float(np.max(np.abs(Q.derivative()(grid))))
    bottom = float(np.max(np.abs(Q(grid))))
    return top / (n * n * bottom)


def net_sup_ratio(Q: PolynomialR, grid, weights, net_indices) -> float:
    """``max_grid |Q| w / max_net |Q| w`` for weights ``w = exp(n phi)``."""
    net_indices = np.asarray(net_indices, dtype=int)
    if net_indices.size == 0:
        raise ValueError("empty net")
    vals = np.abs(Q(np.asarray(grid, dtype=complex))) * np.asarray(weights, dtype=float)
    return float(np.max(vals) / np.max(vals[net_indices]))
