"""Polarization algebra for the transmitter and receiver optics.

States are plane (linear) polarizations described by their angle from
vertical, clockwise positive, normalized to [-90, 90): a plane
polarization is pi-periodic, and two states are distinguishable under a
polarizing beam splitter when they are 90 degrees apart.

Bit convention (fixed here, the wire protocol never transmits it):
bit 0 encodes as vertical in the VH basis and left-diagonal (-45 deg) in
the LR basis; bit 1 encodes as horizontal / right-diagonal (+45 deg).

A real polarizer leaks a small orthogonal component. We carry that as a
power extinction ratio on the state: a ratio of 1000 means 1 part in
1001 of the power sits 90 degrees off the nominal angle. Half-wave
plates are treated as ideal; residual alignment error of the whole chain
is a single configurable angle (see OpticalChain).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .errors import DomainError


class Basis(Enum):
    """Measurement/preparation basis: VH (vertical/horizontal) or LR (diagonals)."""

    VH = "VH"
    LR = "LR"

    @property
    def axes_deg(self) -> tuple[float, float]:
        """(bit-0 axis, bit-1 axis) in degrees from vertical."""
        return _BASIS_AXES[self]

    @property
    def conjugate(self) -> "Basis":
        return Basis.LR if self is Basis.VH else Basis.VH


_BASIS_AXES = {Basis.VH: (0.0, 90.0), Basis.LR: (-45.0, 45.0)}


def normalize_angle_deg(angle_deg: float) -> float:
    """Reduce a plane-polarization angle to [-90, 90) modulo 180."""
    a = math.fmod(angle_deg + 90.0, 180.0)
    if a < 0.0:
        a += 180.0
    return a - 90.0


def plane_angle_distance_deg(a_deg: float, b_deg: float) -> float:
    """Smallest separation of two plane-polarization angles, in [0, 90]."""
    d = abs(normalize_angle_deg(a_deg) - normalize_angle_deg(b_deg))
    return min(d, 180.0 - d)


@dataclass(frozen=True)
class PolarizationState:
    """A plane polarization with a finite polarizer extinction ratio.

    angle_deg is normalized to [-90, 90) on construction. extinction_ratio
    is the power ratio of the intended component to the leaked orthogonal
    component; math.inf models a perfect polarizer.
    """

    angle_deg: float
    extinction_ratio: float = math.inf

    def __post_init__(self) -> None:
        if not self.extinction_ratio > 1.0:
            raise DomainError(
                f"extinction_ratio must be > 1, got {self.extinction_ratio}"
            )
        object.__setattr__(self, "angle_deg", normalize_angle_deg(self.angle_deg))

    @property
    def leakage(self) -> float:
        """Fraction of power in the orthogonal component, 1 / (1 + ratio)."""
        if math.isinf(self.extinction_ratio):
            return 0.0
        return 1.0 / (1.0 + self.extinction_ratio)

    def rotated(self, delta_deg: float) -> "PolarizationState":
        """State rotated by delta_deg (used for residual misalignment)."""
        return replace(self, angle_deg=self.angle_deg + delta_deg)


@dataclass(frozen=True)
class HwpSetting:
    """Half-wave plate fast-axis angle, degrees from vertical."""

    plate_angle_deg: float


# Alice's four plate positions: identity, 45 clockwise, 22.5 counter-clockwise,
# 22.5 clockwise. Bob selects the LR basis with a 22.5-clockwise plate.
ALICE_HWP_SETTINGS: dict[tuple[int, Basis], HwpSetting] = {
    (0, Basis.VH): HwpSetting(0.0),
    (1, Basis.VH): HwpSetting(45.0),
    (0, Basis.LR): HwpSetting(-22.5),
    (1, Basis.LR): HwpSetting(22.5),
}
BOB_LR_SELECTOR = HwpSetting(22.5)


def hwp_transform(state: PolarizationState, plate: HwpSetting) -> PolarizationState:
    """Reflect the polarization plane about the plate's fast axis.

    A half-wave plate at angle alpha maps a plane polarization at theta to
    2*alpha - theta. The plate is ideal, so the extinction ratio is
    unchanged. Total function, its own inverse for a fixed plate.
    """
    return replace(state, angle_deg=2.0 * plate.plate_angle_deg - state.angle_deg)


def encode(bit: int, basis: Basis, extinction_ratio: float) -> PolarizationState:
    """Alice's state for a bit in a basis, carrying the polarizer's ratio.

    Equivalent to sending the vertical laser state through the HWP setting
    of ALICE_HWP_SETTINGS[(bit, basis)].
    """
    if bit not in (0, 1):
        raise DomainError(f"bit must be 0 or 1, got {bit!r}")
    if not extinction_ratio > 1.0:
        raise DomainError(f"extinction_ratio must be > 1, got {extinction_ratio}")
    return PolarizationState(basis.axes_deg[bit], extinction_ratio)


def pbs_probabilities(state: PolarizationState, basis: Basis) -> tuple[float, float]:
    """Detection probabilities (p0, p1) behind a PBS measuring in `basis`.

    The intended component projects by Malus's law, cos^2 of the angle to
    the bit-0 axis; the leaked orthogonal component projects with the
    complementary weight. p0 + p1 == 1 exactly by construction.
    """
    delta = math.radians(state.angle_deg - basis.axes_deg[0])
    m0 = math.cos(delta) ** 2
    leak = state.leakage
    p0 = (1.0 - leak) * m0 + leak * (1.0 - m0)
    return p0, 1.0 - p0


@dataclass(frozen=True)
class OpticalChain:
    """Lumped optical imperfections of the whole transmitter/receiver chain.

    extinction_ratio and misalignment_deg determine the intrinsic error
    probability in a matched basis (see matched_basis_error).
    bob_efficiency is the receiver optics transmission applied to the
    per-arm photon means, default 1 (all loss folded into the channel).
    """

    extinction_ratio: float = 1000.0
    misalignment_deg: float = 0.0
    bob_efficiency: float = 1.0

    def __post_init__(self) -> None:
        if not self.extinction_ratio > 1.0:
            raise DomainError(
                f"extinction_ratio must be > 1, got {self.extinction_ratio}"
            )
        if not 0.0 < self.bob_efficiency <= 1.0:
            raise DomainError(
                f"bob_efficiency must be in (0, 1], got {self.bob_efficiency}"
            )


def matched_basis_error(extinction_ratio: float, misalignment_deg: float) -> float:
    """Probability that a matched-basis photon exits the wrong PBS arm."""
    state = encode(0, Basis.VH, extinction_ratio).rotated(misalignment_deg)
    return pbs_probabilities(state, Basis.VH)[1]


def misalignment_for_matched_error(e_opt: float, extinction_ratio: float) -> float:
    """Residual misalignment angle (degrees) realizing a matched-basis error.

    Inverts matched_basis_error: with leakage l = 1/(1 + ratio),
    e = (1 - l) sin^2(d) + l cos^2(d). The error cannot be calibrated
    below the leakage floor l or above 1/2.
    """
    if not 0.0 <= e_opt <= 0.5:
        raise DomainError(f"e_opt must be in [0, 0.5], got {e_opt}")
    leak = PolarizationState(0.0, extinction_ratio).leakage
    if e_opt < leak:
        raise DomainError(
            f"e_opt {e_opt} is below the extinction-ratio leakage floor {leak:.3e}"
        )
    s2 = (e_opt - leak) / (1.0 - 2.0 * leak)
    return math.degrees(math.asin(math.sqrt(s2)))
