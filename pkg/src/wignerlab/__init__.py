"""Spectral statistics of Wigner matrices against the semicircle law.

Submodules:

- ``potential``: atomic measures, logarithmic potentials and distances
- ``spectra``: Hermitian matrices, eigenvalues, characteristic polynomials
- ``ensembles``: entry laws, seeded Wigner and Erdos-Renyi samplers
- ``oracles``: exact and brute-force reference computations
- ``harness``: Monte Carlo experiments and the oracle suite
"""

from .ensembles import EntryDistribution, Seed, WignerSpec, sample_wigner, scale_to_w
from .potential import (
    SEMICIRCLE,
    AtomicMeasure,
    IntervalQuery,
    dist_potential,
    interval_discrepancy,
    w1_distance,
)
from .spectra import HermitianMatrix, eigenvalues, esd, log_abs_charpoly

__all__ = [
    "AtomicMeasure",
    "EntryDistribution",
    "HermitianMatrix",
    "IntervalQuery",
    "SEMICIRCLE",
    "Seed",
    "WignerSpec",
    "dist_potential",
    "eigenvalues",
    "esd",
    "interval_discrepancy",
    "log_abs_charpoly",
    "sample_wigner",
    "scale_to_w",
    "w1_distance",
]

__version__ = "0.1.0"
