"""Vectorial chip model and six-state polarization tomography.

The chip is modelled at the Jones level: a 2N x 2N transfer matrix on the
port-major mode basis where index 2p is the horizontal mode of port p and
index 2p + 1 its vertical mode. Stokes vectors are bare length-4 float arrays
(S0, S1, S2, S3) with the convention

    S = (|Ex|^2 + |Ey|^2, |Ex|^2 - |Ey|^2, 2 Re(Ex Ey*), 2 Im(Ex Ey*)),

so right circular light (1, -i)/sqrt(2) has S3 = +1. The circular Jones
states are L = (|H> + i|V>)/sqrt(2) and R = (|H> - i|V>)/sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .coupling import CouplingModel, build_coupling_matrix
from .geometry import WaveguideLayout
from .propagation import unitary

PASSIVITY_TOL = 1e-9

_SQRT2 = np.sqrt(2.0)

STATE_ORDER = ("H", "V", "D", "A", "L", "R")

JONES_STATES: Dict[str, np.ndarray] = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([1.0, 1.0], dtype=complex) / _SQRT2,
    "A": np.array([1.0, -1.0], dtype=complex) / _SQRT2,
    "L": np.array([1.0, 1j], dtype=complex) / _SQRT2,
    "R": np.array([1.0, -1j], dtype=complex) / _SQRT2,
}

STOKES_STATES: Dict[str, np.ndarray] = {
    "H": np.array([1.0, 1.0, 0.0, 0.0]),
    "V": np.array([1.0, -1.0, 0.0, 0.0]),
    "D": np.array([1.0, 0.0, 1.0, 0.0]),
    "A": np.array([1.0, 0.0, -1.0, 0.0]),
    "L": np.array([1.0, 0.0, 0.0, -1.0]),
    "R": np.array([1.0, 0.0, 0.0, 1.0]),
}

# Change of basis between the coherency vector (ExEx*, ExEy*, EyEx*, EyEy*)
# and the Stokes vector, and its exact inverse.
_A_STOKES = np.array(
    [
        [1, 0, 0, 1],
        [1, 0, 0, -1],
        [0, 1, 1, 0],
        [0, -1j, 1j, 0],
    ],
    dtype=complex,
)
_A_STOKES_INV = 0.5 * np.array(
    [
        [1, 1, 0, 0],
        [0, 0, 1, 1j],
        [0, 0, 1, -1j],
        [1, -1, 0, 0],
    ],
    dtype=complex,
)


class ReconstructionError(RuntimeError):
    """A tomography record cannot be inverted into a Mueller array."""


@dataclass(frozen=True)
class JonesTransfer:
    """2N x 2N complex port-and-polarization transfer matrix over length z (mm).

    May be non-unitary (loss) but must be passive: no singular value above 1.
    """

    matrix: np.ndarray
    z: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0:
            raise ValueError("Jones transfer must be square with even dimension")
        object.__setattr__(self, "matrix", m)
        top = np.linalg.svd(m, compute_uv=False)[0]
        if top > 1.0 + PASSIVITY_TOL:
            raise ValueError(f"Jones transfer not passive: max singular value {top:.9f}")

    @property
    def n_ports(self) -> int:
        return self.matrix.shape[0] // 2

    def port_block(self, out_port: int, in_port: int) -> np.ndarray:
        """2 x 2 Jones block from one input port to one output port."""
        r, c = 2 * out_port, 2 * in_port
        return self.matrix[r : r + 2, c : c + 2]


@dataclass(frozen=True)
class TomographyRecord:
    """Intensities indexed [input_port, input_state, output_port, analyzer].

    Both polarization axes follow ``STATE_ORDER`` = (H, V, D, A, L, R); for a
    six-port chip this is the full 6 x 6 x 6 x 6 protocol.
    """

    intensities: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.intensities, dtype=float)
        if data.ndim != 4 or data.shape[1] != 6 or data.shape[3] != 6:
            raise ValueError("record must have shape (N, 6, N, 6)")
        if data.shape[0] != data.shape[2]:
            raise ValueError("record must cover equal input and output port counts")
        if np.any(data < 0):
            raise ValueError("intensities must be nonnegative")
        object.__setattr__(self, "intensities", data)

    @property
    def n_ports(self) -> int:
        return self.intensities.shape[0]


@dataclass(frozen=True)
class MuellerArray:
    """Per-port-pair 4 x 4 Mueller matrices with least-squares fit residuals.

    ``matrices[i, j]`` maps input-port-j Stokes vectors to output-port-i ones.
    """

    matrices: np.ndarray
    residuals: np.ndarray

    @property
    def n_ports(self) -> int:
        return self.matrices.shape[0]


@dataclass(frozen=True)
class PoincareEllipsoid:
    """Image of the unit polarization sphere under one Mueller matrix."""

    center: np.ndarray
    semi_axes: np.ndarray
    orientation: np.ndarray
    markers: Dict[str, np.ndarray]
    average_power: float
    degenerate: bool


def stokes_from_intensities(i_h, i_v, i_d, i_a, i_r, i_l) -> np.ndarray:
    """Stokes vector from the six analyzer intensities."""
    intensities = np.asarray([i_h, i_v, i_d, i_a, i_r, i_l], dtype=float)
    if np.any(intensities < 0):
        raise ValueError("analyzer intensities must be nonnegative")
    i_h, i_v, i_d, i_a, i_r, i_l = intensities
    return np.array([i_h + i_v, i_h - i_v, i_d - i_a, i_r - i_l])


def jones_to_mueller(jones: np.ndarray) -> np.ndarray:
    """4 x 4 Mueller matrix of a 2 x 2 Jones block."""
    j = np.asarray(jones, dtype=complex)
    if j.shape != (2, 2):
        raise ValueError("expected a 2 x 2 Jones block")
    m = _A_STOKES @ np.kron(j, j.conj()) @ _A_STOKES_INV
    return m.real


def _per_guide(values, n: int, default: float, name: str) -> np.ndarray:
    if values is None:
        return np.full(n, default, dtype=float)
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} must be a length-{n} vector")
    return arr


def build_polarized_chip(
    layout: WaveguideLayout,
    model_h: CouplingModel,
    model_v: CouplingModel,
    birefringence: Optional[Sequence[float]] = None,
    pol_rotation: Optional[Sequence[float]] = None,
    loss_h: Optional[Sequence[float]] = None,
    loss_v: Optional[Sequence[float]] = None,
    z: float = 1.0,
    neighbor_cutoff: Optional[float] = None,
) -> JonesTransfer:
    """Jones transfer of a chip with polarization-dependent imperfections.

    Builds a 2N x 2N Hermitian generator whose horizontal modes couple
    through ``model_h`` and vertical modes through ``model_v``; per-guide
    ``birefringence`` (1/mm) splits the propagation constants by +d/2 on H
    and -d/2 on V, and ``pol_rotation`` (1/mm) mixes H and V within each
    guide. Propagation over z mm is the exact exponential of the generator;
    ``loss_h``/``loss_v`` amplitude attenuations in (0, 1] are applied to the
    output modes after propagation.

    With equal coupling models, zero birefringence and rotation, and unit
    losses, the result is exactly the scalar propagator tensored with the
    polarization identity.
    """
    n = layout.n
    delta_beta = _per_guide(birefringence, n, 0.0, "birefringence")
    mixing = _per_guide(pol_rotation, n, 0.0, "pol_rotation")
    att_h = _per_guide(loss_h, n, 1.0, "loss_h")
    att_v = _per_guide(loss_v, n, 1.0, "loss_v")
    for name, att in (("loss_h", att_h), ("loss_v", att_v)):
        if np.any(att <= 0) or np.any(att > 1):
            raise ValueError(f"{name} amplitudes must lie in (0, 1]")

    c_h = build_coupling_matrix(layout, model_h, neighbor_cutoff=neighbor_cutoff)
    c_v = build_coupling_matrix(layout, model_v, neighbor_cutoff=neighbor_cutoff)
    generator = np.zeros((2 * n, 2 * n))
    generator[0::2, 0::2] = c_h
    generator[1::2, 1::2] = c_v
    idx = np.arange(n)
    generator[2 * idx, 2 * idx] += delta_beta / 2.0
    generator[2 * idx + 1, 2 * idx + 1] -= delta_beta / 2.0
    generator[2 * idx, 2 * idx + 1] = mixing
    generator[2 * idx + 1, 2 * idx] = mixing

    propagated = unitary(generator, z).matrix
    attenuation = np.empty(2 * n)
    attenuation[0::2] = att_h
    attenuation[1::2] = att_v
    return JonesTransfer(attenuation[:, None] * propagated, float(z))


def simulate_tomography(
    chip: JonesTransfer,
    photometric_noise: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> TomographyRecord:
    """Six-state, six-analyzer tomography record of a Jones transfer.

    Every input port is excited with the six canonical polarization states;
    every output port is projected onto the same six analyzer states.
    ``photometric_noise`` is the relative sigma of multiplicative Gaussian
    intensity noise (clipped at zero); 0 gives the exact noiseless record.
    """
    if photometric_noise < 0:
        raise ValueError("photometric_noise must be nonnegative")
    n = chip.n_ports
    analyzers = np.stack([JONES_STATES[s] for s in STATE_ORDER])
    record = np.zeros((n, 6, n, 6))
    for in_port in range(n):
        for state_idx, state in enumerate(STATE_ORDER):
            field = np.zeros(2 * n, dtype=complex)
            field[2 * in_port : 2 * in_port + 2] = JONES_STATES[state]
            output = (chip.matrix @ field).reshape(n, 2)
            record[in_port, state_idx] = np.abs(output @ analyzers.conj().T) ** 2
    if photometric_noise > 0:
        rng = np.random.default_rng() if rng is None else rng
        record = record * (1.0 + photometric_noise * rng.standard_normal(record.shape))
        record = np.clip(record, 0.0, None)
    return TomographyRecord(record)


_STOKES_INPUTS = np.stack([STOKES_STATES[s] for s in STATE_ORDER])  # (6, 4)


def reconstruct_mueller(record: TomographyRecord) -> MuellerArray:
    """Least-squares Mueller array from a six-state tomography record.

    For every (output, input) port pair the six measured output Stokes
    vectors are regressed against the six canonical input states (24
    equations for 16 unknowns); the redundant protocol averages photometric
    noise. The rms equation residual is reported per pair.
    """
    if np.linalg.matrix_rank(_STOKES_INPUTS) < 4:
        raise ReconstructionError("input states do not span the Stokes space")
    n = record.n_ports
    h, v, d, a, l, r = (STATE_ORDER.index(s) for s in "HVDALR")
    matrices = np.zeros((n, n, 4, 4))
    residuals = np.zeros((n, n))
    for out_port in range(n):
        for in_port in range(n):
            stokes_out = np.empty((6, 4))
            for state_idx in range(6):
                intens = record.intensities[in_port, state_idx, out_port]
                stokes_out[state_idx] = stokes_from_intensities(
                    intens[h], intens[v], intens[d], intens[a], intens[r], intens[l]
                )
            solution, _, rank, _ = np.linalg.lstsq(_STOKES_INPUTS, stokes_out, rcond=None)
            if rank < 4:
                raise ReconstructionError(
                    f"degenerate input states for port pair ({out_port}, {in_port})"
                )
            matrices[out_port, in_port] = solution.T
            misfit = _STOKES_INPUTS @ solution - stokes_out
            residuals[out_port, in_port] = np.sqrt(np.mean(misfit**2))
    return MuellerArray(matrices, residuals)


def poincare_ellipsoid(mueller: np.ndarray, degenerate_tol: float = 1e-12) -> PoincareEllipsoid:
    """Geometry of the image of the unit Poincare sphere under a Mueller map.

    Fully polarized unit-power inputs (1, s) map to center + B s where the
    center is the lower part of the first column and B the lower-right 3 x 3
    block; the singular values of B are the semi-axes and its left singular
    vectors the principal directions. Markers give the mapped H, D, and R
    inputs as arrows along the output polarization direction scaled by
    transmitted power, and ``average_power`` is the mean output S0 over the
    six canonical inputs.
    """
    m = np.asarray(mueller, dtype=float)
    if m.shape != (4, 4) or not np.all(np.isfinite(m)):
        raise ValueError("expected a finite 4 x 4 Mueller matrix")
    center = m[1:, 0].copy()
    block = m[1:, 1:]
    rotation, axes, _ = np.linalg.svd(block)
    if np.linalg.det(rotation) < 0:  # keep a proper rotation
        rotation = rotation.copy()
        rotation[:, -1] *= -1.0
    markers: Dict[str, np.ndarray] = {}
    for state in ("H", "D", "R"):
        out = m @ STOKES_STATES[state]
        direction_norm = np.linalg.norm(out[1:])
        if direction_norm > 0:
            markers[state] = out[0] * out[1:] / direction_norm
        else:
            markers[state] = np.zeros(3)
    average_power = float(
        np.mean([(m @ STOKES_STATES[s])[0] for s in STATE_ORDER])
    )
    degenerate = bool(np.all(axes <= degenerate_tol))
    return PoincareEllipsoid(
        center=center,
        semi_axes=axes,
        orientation=rotation,
        markers=markers,
        average_power=average_power,
        degenerate=degenerate,
    )


def extract_h_subspace(array: MuellerArray) -> np.ndarray:
    """Estimated |U|^2 in the horizontal subspace.

    Applies each Mueller matrix to the H Stokes vector and returns the
    H-projected transmitted power (S0 + S1)/2 of the output, the
    intensity-level transfer a polarization-insensitive measurement of
    horizontal light would see.
    """
    stokes_out = array.matrices @ STOKES_STATES["H"]
    return 0.5 * (stokes_out[..., 0] + stokes_out[..., 1])


def pdl_report(record: TomographyRecord) -> np.ndarray:
    """Per-input-port excess loss of vertical vs horizontal excitation.

    Total transmitted power for an input is the sum of I_H + I_V over all
    output ports; the entry for input port p is 1 - P_V(p) / P_H(p).
    """
    h_idx = STATE_ORDER.index("H")
    v_idx = STATE_ORDER.index("V")
    # I_H + I_V at an output port is its total intensity S0
    totals = record.intensities[:, :, :, (h_idx, v_idx)].sum(axis=(2, 3))
    power_h = totals[:, h_idx]
    power_v = totals[:, v_idx]
    if np.any(power_h <= 0):
        raise ValueError("loss ratio undefined: zero transmitted power for an H input")
    return 1.0 - power_v / power_h
