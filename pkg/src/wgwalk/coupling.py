"""Evanescent coupling: geometric cross-sections to Hermitian coupling matrices.

The coupling rate between two cores separated by r um follows the exponential
law C(r) = c0 exp(-kappa (r - r0)) in 1/mm; diagonal entries carry the
propagation constant beta (1/mm).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import WaveguideLayout, pairwise_distances


@dataclass(frozen=True)
class CouplingModel:
    """Exponential-decay coupling law plus propagation constant.

    The defaults form an illustrative profile (unit rate at 10 um separation,
    halving every ln(2)/0.5 ~ 1.4 um, zero beta), not a calibrated fit to any
    particular device; override per run via configuration.
    """

    c0_per_mm: float = 1.0
    kappa_per_um: float = 0.5
    r0_um: float = 10.0
    beta_per_mm: float = 0.0

    def __post_init__(self):
        if self.c0_per_mm < 0:
            raise ValueError("c0_per_mm must be nonnegative")
        if self.kappa_per_um <= 0:
            raise ValueError("kappa_per_um must be positive")
        if self.r0_um <= 0:
            raise ValueError("r0_um must be positive")


def coupling_constant(r, model: CouplingModel):
    """Coupling rate (1/mm) at separation r (um); strictly decreasing in r."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("core separation must be positive")
    return model.c0_per_mm * np.exp(-model.kappa_per_um * (r - model.r0_um))


def build_coupling_matrix(
    layout: WaveguideLayout,
    model: CouplingModel,
    z: Optional[float] = None,
    neighbor_cutoff: Optional[float] = None,
    beta_per_guide: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """N x N symmetric coupling matrix at a layout cross-section.

    Off-diagonal entries apply the exponential law to the pairwise distances
    (zeroed beyond ``neighbor_cutoff`` um when given). The diagonal is the
    model's uniform beta, or ``beta_per_guide`` when per-guide propagation
    constants are needed.
    """
    r = pairwise_distances(layout, z)
    n = r.shape[0]
    c = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    c[off] = coupling_constant(r[off], model)
    if neighbor_cutoff is not None:
        c[off & (r > neighbor_cutoff)] = 0.0
    if beta_per_guide is None:
        np.fill_diagonal(c, model.beta_per_mm)
    else:
        beta = np.asarray(beta_per_guide, dtype=float)
        if beta.shape != (n,):
            raise ValueError(f"beta_per_guide must have length {n}")
        np.fill_diagonal(c, beta)
    return c
