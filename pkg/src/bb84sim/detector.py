"""Window-based click model of the two single-photon avalanche diodes.

Time is discretized into windows equal to the detector dead time: within
one window a SPAD either clicks or it doesn't, and photon number plus
dark counts fold into a single Poisson click probability per arm. There
is no intra-window dynamics and no paralyzable dead-time correction; the
mean photon number is defined per this window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class DetectorParams:
    """SPAD parameters shared by both arms unless configured separately.

    dark_rate_hz is the dark-count rate of ONE detector; budget-level
    calibration quotes a total over the pair and splits it evenly.
    """

    quantum_efficiency: float = 0.38
    dead_time_ns: float = 78.0
    dark_rate_hz: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.quantum_efficiency <= 1.0:
            raise DomainError(
                f"quantum_efficiency must be in (0, 1], got {self.quantum_efficiency}"
            )
        if not self.dead_time_ns > 0.0:
            raise DomainError(f"dead_time_ns must be > 0, got {self.dead_time_ns}")
        if self.dark_rate_hz < 0.0:
            raise DomainError(f"dark_rate_hz must be >= 0, got {self.dark_rate_hz}")

    @property
    def window_s(self) -> float:
        """Discrimination-window length in seconds (equal to the dead time)."""
        return self.dead_time_ns * 1e-9

    @property
    def dark_mean_per_window(self) -> float:
        """Expected dark counts of one detector in one window."""
        return self.dark_rate_hz * self.window_s


@dataclass(frozen=True)
class SourceParams:
    """Weak-coherent source: mean photon number per window at channel input."""

    mean_photons_per_window: float
    wavelength_nm: float = 632.8

    def __post_init__(self) -> None:
        if self.mean_photons_per_window < 0.0:
            raise DomainError(
                "mean_photons_per_window must be >= 0, "
                f"got {self.mean_photons_per_window}"
            )
        if not self.wavelength_nm > 0.0:
            raise DomainError(f"wavelength_nm must be > 0, got {self.wavelength_nm}")


class WindowOutcome(Enum):
    """Click pattern of one discrimination window across the two arms."""

    NONE = "none"
    DET0 = "det0"
    DET1 = "det1"
    BOTH = "both"


def click_probability(mean_photons_at_arm: float, params: DetectorParams) -> float:
    """Probability that one SPAD clicks at least once in one window.

    Photon detections and dark counts are independent Poisson processes,
    so p = 1 - exp(-(eta * mu_arm + r_dark * w)). Computed with expm1 to
    stay accurate at the tiny means this model lives at. Mathematically
    p < 1 always; in double precision it saturates to exactly 1.0 once
    the no-click probability drops below half an ulp (mean counts ~36+).
    """
    if mean_photons_at_arm < 0.0:
        raise DomainError(
            f"mean_photons_at_arm must be >= 0, got {mean_photons_at_arm}"
        )
    mean_counts = (
        params.quantum_efficiency * mean_photons_at_arm + params.dark_mean_per_window
    )
    return -math.expm1(-mean_counts)


def simulate_window(
    mean0: float,
    mean1: float,
    params: DetectorParams,
    rng: np.random.Generator,
) -> WindowOutcome:
    """Draw one window: independent Bernoulli clicks for the two arms.

    Consumes exactly two uniform variates (arm 0 first), so outcomes are
    reproducible from the generator state alone.
    """
    p0 = click_probability(mean0, params)
    p1 = click_probability(mean1, params)
    click0 = rng.random() < p0
    click1 = rng.random() < p1
    if click0 and click1:
        return WindowOutcome.BOTH
    if click0:
        return WindowOutcome.DET0
    if click1:
        return WindowOutcome.DET1
    return WindowOutcome.NONE
