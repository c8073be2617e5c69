"""Transverse waveguide layouts and z-dependent fan-in trajectories.

Units are fixed package-wide: transverse coordinates in micrometers (um),
propagation distance z in millimeters (mm). Layout builders return immutable
``WaveguideLayout`` objects; layouts produced by :func:`fan_in_layout` carry a
``z_profile`` callable defined on a closed z span.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class WaveguideLayout:
    """Positions of N waveguide cores in the transverse plane.

    ``positions`` is an (N, 2) array in um. For z-dependent layouts it holds
    the cross-section at the end of the span, and ``z_profile`` maps a
    propagation distance in ``z_span`` (mm) to the full (N, 2) cross-section.
    """

    positions: np.ndarray
    z_profile: Optional[Callable[[float], np.ndarray]] = None
    z_span: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError("positions must be an (N, 2) array with N >= 1")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        object.__setattr__(self, "positions", pos)
        if (self.z_profile is None) != (self.z_span is None):
            raise ValueError("z_profile and z_span must be provided together")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def positions_at(self, z: Optional[float] = None) -> np.ndarray:
        """Cross-section at propagation distance z, or the static one."""
        if z is None:
            return self.positions
        if self.z_profile is None:
            raise ValueError("layout has no z_profile")
        z0, z1 = self.z_span
        if not z0 <= z <= z1:
            raise ValueError(f"z = {z} mm outside profile domain [{z0}, {z1}] mm")
        return self.z_profile(z)


def linear_layout(n: int, pitch: float) -> WaveguideLayout:
    """Collinear array on the x-axis: core k at (k * pitch, 0) um."""
    if n < 1:
        raise ValueError("waveguide count must be at least 1")
    if pitch <= 0:
        raise ValueError("pitch must be positive")
    x = pitch * np.arange(n, dtype=float)
    return WaveguideLayout(np.column_stack([x, np.zeros(n)]))


def elliptical_layout(
    n: int, a: float, b: float, angle_offset: float = 0.0
) -> WaveguideLayout:
    """Cores with equal angular spacing on an ellipse.

    Core k sits at (a cos t_k, b sin t_k) with t_k = angle_offset + 2 pi k / n,
    counterclockwise, so index 0 lies at angle ``angle_offset``.
    """
    if n < 1:
        raise ValueError("waveguide count must be at least 1")
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    theta = angle_offset + _TWO_PI * np.arange(n, dtype=float) / n
    return WaveguideLayout(np.column_stack([a * np.cos(theta), b * np.sin(theta)]))


def permuted_layout(layout: WaveguideLayout, order: Sequence[int]) -> WaveguideLayout:
    """Relabel cores so that new index k occupies old index order[k]."""
    idx = np.asarray(order, dtype=int)
    if sorted(idx.tolist()) != list(range(layout.n)):
        raise ValueError(f"order must be a permutation of 0..{layout.n - 1}")
    if layout.z_profile is None:
        return WaveguideLayout(layout.positions[idx])
    profile = layout.z_profile
    return WaveguideLayout(
        layout.positions[idx],
        z_profile=lambda z: profile(z)[idx],
        z_span=layout.z_span,
    )


def _raised_sine(start: np.ndarray, end: np.ndarray, length: float, z: float):
    # zero-slope-at-endpoints S-bend, applied component-wise
    u = z / length
    s = u - np.sin(_TWO_PI * u) / _TWO_PI
    return start + (end - start) * s


def raised_sine_path(start, end, length: float) -> Callable[[float], np.ndarray]:
    """S-bend path from ``start`` to ``end`` over z in [0, length] mm.

    The trajectory is x(z) = x0 + dx (z/L - sin(2 pi z/L)/(2 pi)) per
    coordinate: endpoints are exact and the first derivative vanishes at both
    ends, the standard bend-loss-minimizing form.
    """
    if length <= 0:
        raise ValueError("path length must be positive")
    p0 = np.asarray(start, dtype=float)
    p1 = np.asarray(end, dtype=float)

    def path(z: float) -> np.ndarray:
        if not 0.0 <= z <= length:
            raise ValueError(f"z = {z} mm outside path domain [0, {length}] mm")
        return _raised_sine(p0, p1, length, z)

    return path


def fan_in_layout(
    input_layout: WaveguideLayout,
    intermediate: WaveguideLayout,
    final: WaveguideLayout,
    stage1_length: float,
    stage2_length: float,
) -> WaveguideLayout:
    """Two-stage raised-sine fan-in through an intermediate cross-section.

    Every core follows a raised-sine bend from its input position to the
    intermediate one over ``stage1_length`` mm, then another to its final
    position over ``stage2_length`` mm; the profile is continuous at the
    stage boundary. The returned layout's static positions are the final
    cross-section and its z_profile spans [0, stage1 + stage2].
    """
    if not input_layout.n == intermediate.n == final.n:
        raise ValueError("input, intermediate, and final layouts must have equal N")
    if stage1_length <= 0 or stage2_length <= 0:
        raise ValueError("stage lengths must be positive")
    p0 = input_layout.positions
    p1 = intermediate.positions
    p2 = final.positions

    def profile(z: float) -> np.ndarray:
        if z <= stage1_length:
            return _raised_sine(p0, p1, stage1_length, z)
        return _raised_sine(p1, p2, stage2_length, z - stage1_length)

    return WaveguideLayout(
        p2.copy(), z_profile=profile, z_span=(0.0, stage1_length + stage2_length)
    )


def pairwise_distances(
    layout: WaveguideLayout, z: Optional[float] = None
) -> np.ndarray:
    """Symmetric matrix of Euclidean core separations (um) at a cross-section."""
    pos = layout.positions_at(z)
    diff = pos[:, None, :] - pos[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))
