"""Dense Hermitian matrices, their spectra and characteristic polynomials.

Eigenvalues come from Householder reduction to real tridiagonal form
followed by implicit shifted QL; eigenvectors are never formed.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import _kernels
from .potential import AtomicMeasure

__all__ = [
    "HermitianMatrix",
    "Spectrum",
    "EigenConvergenceError",
    "tridiagonalize",
    "eigenvalues",
    "esd",
    "log_abs_charpoly",
    "charpoly_coeffs_small",
]


class EigenConvergenceError(RuntimeError):
    """The QL iteration exceeded its sweep cap."""


class HermitianMatrix:
    """Immutable dense Hermitian matrix.

    Real input is stored as float64, anything else as complex128. The
    constructor rejects input that is not exactly conjugate-symmetric
    unless ``symmetrize`` is set, in which case ``(A + A^H) / 2`` is used.
    """

    __slots__ = ("_a",)

    def __init__(self, entries, symmetrize: bool = False):
        a = np.array(entries)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError("need a nonempty square matrix")
        if np.iscomplexobj(a):
            a = a.astype(complex)
            if not np.any(a.imag):
                a = np.ascontiguousarray(a.real)
        else:
            a = a.astype(float)
        if symmetrize:
            a = 0.5 * (a + a.conj().T)
        elif not np.array_equal(a, a.conj().T):
            raise ValueError("matrix is not Hermitian")
        if not np.all(np.isfinite(a)):
            raise ValueError("entries must be finite")
        a = np.ascontiguousarray(a)
        a.setflags(write=False)
        self._a = a

    @classmethod
    def _trusted(cls, a):
        obj = cls.__new__(cls)
        a = np.ascontiguousarray(a)
        a.setflags(write=False)
        obj._a = a
        return obj

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._a

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self._a)

    def __array__(self, dtype=None, copy=None):
        return self._a if dtype is None else self._a.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash((self.n, self._a.astype(complex).tobytes()))

    def __repr__(self):
        return f"HermitianMatrix(n={self.n})"

    def scaled(self, c: float) -> "HermitianMatrix":
        return HermitianMatrix._trusted(self._a * float(c))

    def trace(self) -> float:
        return math.fsum(np.diag(self._a).real.tolist())

    def frobenius_sq(self) -> float:
        return math.fsum((np.abs(self._a) ** 2).ravel().tolist())

    def to_json(self) -> str:
        a = self._a.astype(complex).ravel()
        return json.dumps({"n": self.n, "entries": [[float(v.real), float(v.imag)] for v in a]})

    @classmethod
    def from_json(cls, text: str) -> "HermitianMatrix":
        data = json.loads(text)
        n = int(data["n"])
        flat = np.array([complex(re, im) for re, im in data["entries"]])
        return cls(flat.reshape(n, n))


class Spectrum(tuple):
    """Sorted eigenvalues, as a tuple of floats with an ndarray view."""

    def __new__(cls, values):
        vals = np.sort(np.asarray(values, dtype=float))
        if not np.all(np.isfinite(vals)):
            raise ValueError("eigenvalues must be finite")
        return super().__new__(cls, vals.tolist())

    @property
    def array(self) -> np.ndarray:
        return np.array(self, dtype=float)


def tridiagonalize(H: HermitianMatrix):
    """Real symmetric tridiagonal form ``(diag, offdiag)`` unitarily similar to H.

    Subdiagonal phases are absorbed by a diagonal unitary, so ``offdiag``
    is nonnegative.
    """
    work = np.array(H.entries, copy=True)
    if H.n == 1:
        return np.array([work[0, 0].real]), np.zeros(0)
    return _kernels.householder_tridiagonal(work)


def eigenvalues(H: HermitianMatrix) -> Spectrum:
    """All eigenvalues of ``H``, ascending."""
    diag, off = tridiagonalize(H)
    vals, ok = _kernels.tridiagonal_ql(diag, off, 30 * H.n)
    if not ok:
        raise EigenConvergenceError(f"QL iteration cap of {30 * H.n} sweeps exceeded (n={H.n})")
    return Spectrum(vals)


def esd(W: HermitianMatrix) -> AtomicMeasure:
    """Empirical spectral distribution of an already scaled matrix."""
    return AtomicMeasure(eigenvalues(W).array)


def log_abs_charpoly(W: HermitianMatrix, z) -> float:
    """``log|det(z I - W)|`` from complex LU with partial pivoting."""
    z = complex(z)
    a = -np.array(W.entries, dtype=complex)
    a[np.diag_indices_from(a)] += z
    return float(_kernels.lu_log_abs_det(a))


def charpoly_coeffs_small(H: HermitianMatrix) -> np.ndarray:
    """Ascending coefficients of ``det(z I - H)`` by Faddeev-LeVerrier, n <= 8."""
    n = H.n
    if n > 8:
        raise ValueError("Faddeev-LeVerrier oracle is limited to n <= 8")
    a = np.asarray(H.entries, dtype=complex)
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[n] = 1.0
    m = np.zeros((n, n), dtype=complex)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[n - k + 1] * eye
        coeffs[n - k] = -np.trace(a @ m) / k
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if np.max(np.abs(coeffs.imag)) > 1e-10 * scale:
        raise ArithmeticError("characteristic polynomial has a non-real coefficient")
    return coeffs.real.copy()
