"""Propagators U(z) = exp(i z C) and single-photon observables.

The matrix exponential of the real-symmetric (more generally Hermitian)
coupling matrix is evaluated spectrally, so the result is unitary by
construction. ``matrix[k, j]`` is the complex amplitude from input port j to
output port k; ports are 0-based throughout the library.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coupling import CouplingModel, build_coupling_matrix
from .geometry import WaveguideLayout

# Default numerical tolerances; overridable per call where they matter.
HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class Propagator:
    """Port-to-port transfer matrix accumulated over length z (mm)."""

    matrix: np.ndarray
    z: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _as_transfer_matrix(propagator) -> np.ndarray:
    return np.asarray(getattr(propagator, "matrix", propagator))


def _check_hermitian(c: np.ndarray, tol: float) -> None:
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("coupling matrix must be square")
    deviation = np.max(np.abs(c - c.conj().T))
    if deviation > tol:
        raise ValueError(
            f"coupling matrix is not Hermitian (max deviation {deviation:.3e})"
        )


def unitary(
    coupling_matrix: np.ndarray, z: float, hermiticity_tol: float = HERMITICITY_TOL
) -> Propagator:
    """Propagator exp(i z C) of a Hermitian coupling matrix.

    Uses the eigendecomposition of C, so unitarity holds to machine precision
    regardless of ||z C||.
    """
    c = np.asarray(coupling_matrix)
    _check_hermitian(c, hermiticity_tol)
    if z < 0:
        raise ValueError("propagation length must be nonnegative")
    w, v = np.linalg.eigh(c)
    u = (v * np.exp(1j * z * w)) @ v.conj().T
    return Propagator(u, float(z))


def single_photon_distribution(propagator, input_port: int) -> np.ndarray:
    """Output probabilities |U[k, input]|^2; sums to 1 for unitary U."""
    u = _as_transfer_matrix(propagator)
    if not 0 <= input_port < u.shape[0]:
        raise IndexError(f"input port {input_port} out of range for {u.shape[0]} ports")
    return np.abs(u[:, input_port]) ** 2


def evolve_amplitudes(
    coupling_matrix: np.ndarray,
    initial: np.ndarray,
    z_grid: Sequence[float],
    hermiticity_tol: float = HERMITICITY_TOL,
) -> np.ndarray:
    """Amplitude vectors exp(i z C) @ initial for every z in the grid.

    Diagonalizes C once; returns an array of shape (len(z_grid), N).
    """
    c = np.asarray(coupling_matrix)
    _check_hermitian(c, hermiticity_tol)
    z_grid = np.asarray(z_grid, dtype=float)
    a0 = np.asarray(initial, dtype=complex)
    w, v = np.linalg.eigh(c)
    modal = v.conj().T @ a0
    phases = np.exp(1j * np.outer(z_grid, w))
    return (phases * modal) @ v.T


def intensity_trace(
    coupling_matrix: np.ndarray, input_port: int, z_grid: Sequence[float]
) -> np.ndarray:
    """Single-photon output distribution at each z of a nondecreasing grid.

    Returns one row per grid point; every row sums to 1 for Hermitian C.
    """
    z_grid = np.asarray(z_grid, dtype=float)
    if z_grid.ndim != 1 or z_grid.size == 0:
        raise ValueError("z_grid must be a nonempty 1-D sequence")
    if np.any(np.diff(z_grid) < 0):
        raise ValueError("z_grid must be nondecreasing")
    n = np.asarray(coupling_matrix).shape[0]
    if not 0 <= input_port < n:
        raise IndexError(f"input port {input_port} out of range for {n} ports")
    one_hot = np.zeros(n, dtype=complex)
    one_hot[input_port] = 1.0
    amps = evolve_amplitudes(coupling_matrix, one_hot, z_grid)
    return np.abs(amps) ** 2


def propagate_z_dependent(
    layout: WaveguideLayout,
    model: CouplingModel,
    z_start: float,
    z_end: float,
    steps: int,
    neighbor_cutoff: Optional[float] = None,
) -> Propagator:
    """Ordered product of short-segment propagators along a z-dependent layout.

    The interval is split into ``steps`` equal segments; each segment applies
    exp(i dz C(z_mid)) with the coupling matrix sampled at its midpoint. The
    product converges to the z-ordered exponential as steps grows (the layout
    profile must cover [z_start, z_end]).
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if z_end < z_start:
        raise ValueError("z_end must not precede z_start")
    dz = (z_end - z_start) / steps
    u = np.eye(layout.n, dtype=complex)
    for k in range(steps):
        z_mid = z_start + (k + 0.5) * dz
        c = build_coupling_matrix(layout, model, z=z_mid, neighbor_cutoff=neighbor_cutoff)
        u = unitary(c, dz).matrix @ u
    return Propagator(u, z_end - z_start)
