"""Random matrix and random graph samplers plus exhaustive enumerators.

Every sampler draws from its own counter-based stream keyed by
``(master seed, sample index)``, so a sample does not depend on which
worker produced it or in what order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .spectra import HermitianMatrix

__all__ = [
    "KINDS",
    "EntryDistribution",
    "Moments",
    "WignerSpec",
    "Seed",
    "rng_for",
    "moments_of",
    "sample_entries",
    "sample_wigner",
    "scale_to_w",
    "sample_er_adjacency",
    "er_sigma",
    "er_normalize",
    "er_center",
    "enumerate_symmetric_rademacher",
]

KINDS = ("real-gaussian", "complex-gaussian", "rademacher", "centered-bernoulli", "custom-discrete")


class Moments(NamedTuple):
    mean: complex
    variance: float
    second_moment: complex
    abs_fourth_moment: float


@dataclass(frozen=True)
class EntryDistribution:
    """Law of a single matrix entry.

    ``params`` holds the variance for ``real-gaussian``, ``p`` for
    ``centered-bernoulli`` and ``(points, probs)`` for ``custom-discrete``.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "real-gaussian":
            (v,) = self.params
            if not v >= 0:
                raise ValueError("variance must be nonnegative")
        elif self.kind == "centered-bernoulli":
            (p,) = self.params
            if not 0 < p < 1:
                raise ValueError("centered-bernoulli needs 0 < p < 1")
        elif self.kind == "custom-discrete":
            pts, probs = self.params
            if len(pts) != len(probs) or not pts:
                raise ValueError("custom-discrete needs matching points and probabilities")
            if any(q < 0 for q in probs) or abs(sum(probs) - 1.0) > 1e-12:
                raise ValueError("probabilities must be nonnegative and sum to 1")
            if abs(sum(q * x for x, q in zip(pts, probs))) > 1e-12:
                raise ValueError("custom-discrete law must have mean 0")

    @classmethod
    def real_gaussian(cls, variance: float = 1.0):
        return cls("real-gaussian", (float(variance),))

    @classmethod
    def complex_gaussian(cls):
        return cls("complex-gaussian")

    @classmethod
    def rademacher(cls):
        return cls("rademacher")

    @classmethod
    def centered_bernoulli(cls, p: float):
        return cls("centered-bernoulli", (float(p),))

    @classmethod
    def custom_discrete(cls, points, probs):
        return cls("custom-discrete", (tuple(points), tuple(float(q) for q in probs)))

    @classmethod
    def zero(cls):
        """The constant 0 (used for the diagonal by default)."""
        return cls.custom_discrete([0.0], [1.0])

    @property
    def is_complex(self) -> bool:
        if self.kind == "complex-gaussian":
            return True
        if self.kind == "custom-discrete":
            return any(isinstance(x, complex) and x.imag != 0 for x in self.params[0])
        return False

    def __str__(self):
        if self.kind in ("real-gaussian", "centered-bernoulli"):
            return f"{self.kind}({self.params[0]!r})"
        if self.kind == "custom-discrete":
            pts, probs = self.params
            return "custom-discrete(" + ", ".join(f"{x!r}:{q!r}" for x, q in zip(pts, probs)) + ")"
        return self.kind


def moments_of(d: EntryDistribution) -> Moments:
    """Analytic ``(mean, variance, E xi^2, E|xi|^4)``."""
    if d.kind == "real-gaussian":
        v = d.params[0]
        return Moments(0.0, v, v, 3.0 * v * v)
    if d.kind == "complex-gaussian":
        return Moments(0.0, 1.0, 0.0, 2.0)
    if d.kind == "rademacher":
        return Moments(0.0, 1.0, 1.0, 1.0)
    if d.kind == "centered-bernoulli":
        p = d.params[0]
        return Moments(0.0, 1.0, 1.0, (p ** 3 + (1 - p) ** 3) / (p * (1 - p)))
    pts, probs = d.params
    mean = sum(q * x for x, q in zip(pts, probs))
    var = sum(q * abs(x - mean) ** 2 for x, q in zip(pts, probs))
    m2 = sum(q * x * x for x, q in zip(pts, probs))
    m4 = sum(q * abs(x) ** 4 for x, q in zip(pts, probs))
    return Moments(mean, float(var), m2, float(m4))


def sample_entries(d: EntryDistribution, size, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` i.i.d. entries from ``d``."""
    if d.kind == "real-gaussian":
        return rng.standard_normal(size) * math.sqrt(d.params[0])
    if d.kind == "complex-gaussian":
        z = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
        return (z[0] + 1j * z[1]) * math.sqrt(0.5)
    if d.kind == "rademacher":
        return rng.integers(0, 2, size) * 2.0 - 1.0
    if d.kind == "centered-bernoulli":
        p = d.params[0]
        b = (rng.random(size) < p).astype(float)
        return (b - p) / math.sqrt(p * (1 - p))
    pts, probs = d.params
    idx = rng.choice(len(pts), size=size, p=np.asarray(probs))
    return np.asarray(pts)[idx]


@dataclass(frozen=True)
class WignerSpec:
    """Matrix size plus diagonal and off-diagonal entry laws."""

    n: int
    offdiag: EntryDistribution = field(default_factory=EntryDistribution.rademacher)
    diag: EntryDistribution = field(default_factory=EntryDistribution.zero)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.diag.is_complex or self.diag.kind == "complex-gaussian":
            raise ValueError("diagonal entries must be real")
        mo = moments_of(self.offdiag)
        if abs(mo.variance - 1.0) > 1e-12 or abs(mo.mean) > 1e-12:
            raise ValueError("off-diagonal law must have mean 0 and variance 1")
        if abs(moments_of(self.diag).mean) > 1e-12:
            raise ValueError("diagonal law must have mean 0")

    @property
    def alpha(self) -> float:
        return moments_of(self.diag).variance

    @property
    def beta(self) -> float:
        return moments_of(self.offdiag).abs_fourth_moment


@dataclass(frozen=True)
class Seed:
    master: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.master < 2 ** 64 or self.stream < 0:
            raise ValueError("master seed must be a 64-bit unsigned integer")


def rng_for(seed: Seed) -> np.random.Generator:
    """Philox generator on the stream derived from ``(master, stream)``."""
    ss = np.random.SeedSequence([seed.master & 0xFFFFFFFF, seed.master >> 32, seed.stream])
    return np.random.Generator(np.random.Philox(ss))


def sample_wigner(spec: WignerSpec, seed: Seed) -> HermitianMatrix:
    """Unscaled Wigner matrix ``M_n``."""
    rng = rng_for(seed)
    n = spec.n
    iu = np.triu_indices(n, 1)
    off = sample_entries(spec.offdiag, iu[0].size, rng)
    dia = sample_entries(spec.diag, n, rng).real
    dtype = complex if np.iscomplexobj(off) else float
    m = np.zeros((n, n), dtype=dtype)
    m[iu] = off
    m[(iu[1], iu[0])] = np.conj(off)
    m[np.diag_indices(n)] = dia
    return HermitianMatrix._trusted(m)


def scale_to_w(M: HermitianMatrix) -> HermitianMatrix:
    """``W_n = n^{-1/2} M_n``."""
    return M.scaled(1.0 / math.sqrt(M.n))


def _check_p(p):
    if not 0 <= p <= 0.5:
        raise ValueError("edge probability must lie in [0, 1/2]")


def sample_er_adjacency(n: int, p: float, seed: Seed) -> HermitianMatrix:
    """Adjacency matrix of a G(n, p) graph."""
    _check_p(p)
    rng = rng_for(seed)
    iu = np.triu_indices(n, 1)
    edges = (rng.random(iu[0].size) < p).astype(float)
    a = np.zeros((n, n))
    a[iu] = edges
    a[(iu[1], iu[0])] = edges
    return HermitianMatrix._trusted(a)


def er_sigma(p: float) -> float:
    return math.sqrt(p * (1.0 - p))


def er_normalize(A: HermitianMatrix, p: float) -> HermitianMatrix:
    """``A / (sqrt(n) sigma)``."""
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    return A.scaled(1.0 / (math.sqrt(A.n) * er_sigma(p)))


def er_center(W: HermitianMatrix, p: float) -> HermitianMatrix:
    """``W - t J + t I`` with ``t = p / (sigma sqrt(n))``; the diagonal is 0."""
    if not 0 < p < 1:
        raise ValueError("need 0 < p < 1")
    n = W.n
    t = p / (er_sigma(p) * math.sqrt(n))
    a = np.array(W.entries, dtype=float if W.is_real else complex) - t
    a[np.diag_indices(n)] = 0.0
    return HermitianMatrix._trusted(a)


def enumerate_symmetric_rademacher(n: int, zero_diagonal: bool = True) -> Iterator[HermitianMatrix]:
    """All real symmetric matrices with +-1 entries, lexicographic in the upper triangle.

    The upper triangle is read row by row (diagonal included unless
    ``zero_diagonal``), with -1 ordered before +1.
    """
    if not 1 <= n <= 4:
        raise ValueError("exhaustive enumeration is limited to 1 <= n <= 4")
    k = 1 if zero_diagonal else 0
    iu = np.triu_indices(n, k)
    for signs in itertools.product((-1.0, 1.0), repeat=iu[0].size):
        m = np.zeros((n, n))
        m[iu] = signs
        m[(iu[1], iu[0])] = signs
        yield HermitianMatrix._trusted(m)
