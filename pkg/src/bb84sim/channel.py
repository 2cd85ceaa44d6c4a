"""Attenuation models for the quantum channel.

Everything here is Beer-Lambert at 632.8 nm: power transmittance
t = exp(-k L) for a horizontal plane-parallel path with extinction
coefficient k, plus the gas-cell variant where the absorbance comes from
molar absorptivity, concentration, and path length.

A built-in table carries eight (season, aerosol, visibility) extinction
coefficients. Each row also ships a quoted equivalent path length at
one-percent transmittance; two of the quoted lengths disagree with the
recomputed -ln(0.01)/k value, and the reporting layer surfaces those
deviations instead of papering over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, NoFinitePathError, ScenarioError

# CODATA 2018 molar gas constant, J/(mol K).
GAS_CONSTANT = 8.314462618


class Season(Enum):
    SUMMER = "summer"
    WINTER = "winter"


class Aerosol(Enum):
    URBAN = "urban"
    RURAL = "rural"


@dataclass(frozen=True)
class AtmosphereProfile:
    """One atmospheric condition: extinction coefficient at 632.8 nm.

    k_per_km aggregates molecular and aerosol extinction for the given
    season, aerosol class, and meteorological visibility; it is input
    data, not something this package derives from radiative transfer.
    """

    season: Season
    aerosol: Aerosol
    visibility_km: float
    k_per_km: float

    def __post_init__(self) -> None:
        if not self.visibility_km > 0.0:
            raise DomainError(f"visibility_km must be > 0, got {self.visibility_km}")
        if not self.k_per_km > 0.0:
            raise DomainError(f"k_per_km must be > 0, got {self.k_per_km}")

    @property
    def label(self) -> str:
        v = self.visibility_km
        vis = f"{v:g}"
        return f"{self.season.value}-{self.aerosol.value}-{vis}km"


def validate_transmittance(value: float) -> float:
    """Check 0 < value <= 1 and return it; DomainError otherwise."""
    if not 0.0 < value <= 1.0:
        raise DomainError(f"transmittance must be in (0, 1], got {value}")
    return value


def transmittance(k_per_km: float, length_km: float) -> float:
    """Power transmittance exp(-k L) of a homogeneous horizontal path."""
    if k_per_km < 0.0:
        raise DomainError(f"k_per_km must be >= 0, got {k_per_km}")
    if length_km < 0.0:
        raise DomainError(f"length_km must be >= 0, got {length_km}")
    return math.exp(-k_per_km * length_km)


def equivalent_path(k_per_km: float, t: float) -> float:
    """Path length (km) over which extinction k yields transmittance t.

    Inverts transmittance: L = -ln(t) / k. Raises NoFinitePathError when
    k = 0 but t < 1 (a lossless medium never attenuates).
    """
    validate_transmittance(t)
    if k_per_km < 0.0:
        raise DomainError(f"k_per_km must be >= 0, got {k_per_km}")
    if t == 1.0:
        return 0.0
    if k_per_km == 0.0:
        raise NoFinitePathError(
            f"no finite path through a k = 0 medium reaches transmittance {t}"
        )
    return -math.log(t) / k_per_km


def loss_db(t: float) -> float:
    """Channel loss in dB, -10 log10(t); 0 dB for a transparent channel."""
    validate_transmittance(t)
    return 0.0 - 10.0 * math.log10(t)


class AbsorbanceConvention(Enum):
    """Base of the absorbance exponent: T = 10^-A (decadic) or e^-A (natural).

    Molar absorptivities quoted in cm^-1 (mol/L)^-1 are conventionally
    decadic, but the convention is configurable because source data does
    not always state it.
    """

    DECADIC = "decadic"
    NATURAL = "natural"


@dataclass(frozen=True)
class BromineCell:
    """Absorbing-gas cell: bromine vapor filling a folded optical path.

    molar_absorptivity is in cm^-1 (mol/L)^-1 at 632.8 nm. Temperature
    defaults to laboratory ambient since the fill temperature is not
    otherwise constrained.
    """

    molar_absorptivity: float = 22.4
    pressure_hpa: float = 1.3
    temperature_k: float = 293.0
    path_length_m: float = 26.0

    def __post_init__(self) -> None:
        for field in (
            "molar_absorptivity",
            "pressure_hpa",
            "temperature_k",
            "path_length_m",
        ):
            value = getattr(self, field)
            if not value > 0.0:
                raise DomainError(f"{field} must be > 0, got {value}")

    @property
    def molar_concentration(self) -> float:
        """Ideal-gas molar concentration in mol/L: p / (R T) / 1000."""
        pressure_pa = self.pressure_hpa * 100.0
        return pressure_pa / (GAS_CONSTANT * self.temperature_k) / 1000.0

    @property
    def absorbance(self) -> float:
        """Dimensionless absorbance epsilon * c * path, path in cm."""
        return self.molar_absorptivity * self.molar_concentration * (
            self.path_length_m * 100.0
        )


def bromine_transmittance(
    cell: BromineCell,
    convention: AbsorbanceConvention = AbsorbanceConvention.DECADIC,
) -> float:
    """Predicted cell transmittance from gas-phase Beer-Lambert absorption.

    This is a physics cross-check, not a fit: for the default cell it
    predicts ~7.8e-4 (decadic) or ~4.5e-2 (natural), both far from a
    typical measured one-percent setting, and reports surface all three
    numbers side by side.
    """
    a = cell.absorbance
    if convention is AbsorbanceConvention.DECADIC:
        t = 10.0 ** (-a)
    else:
        t = math.exp(-a)
    return min(t, 1.0)


# Extinction coefficients (632.8 nm, horizontal ground-level path) for the
# eight built-in conditions, each carrying the conventionally quoted
# equivalent path length at t = 0.01 so reports can cross-check it against
# the -ln(t)/k formula (two rows disagree by more than 1%).
_TABLE_ROWS: tuple[tuple[Season, Aerosol, float, float, float], ...] = (
    (Season.SUMMER, Aerosol.URBAN, 5.0, 0.262, 17.6),
    (Season.SUMMER, Aerosol.URBAN, 13.0, 0.0901, 51.1),
    (Season.SUMMER, Aerosol.RURAL, 5.0, 0.0460, 100.07),
    (Season.SUMMER, Aerosol.RURAL, 13.0, 0.0158, 290.9),
    (Season.WINTER, Aerosol.URBAN, 5.0, 0.254, 18.1),
    (Season.WINTER, Aerosol.URBAN, 13.0, 0.0838, 52.7),
    (Season.WINTER, Aerosol.RURAL, 5.0, 0.0451, 102.1),
    (Season.WINTER, Aerosol.RURAL, 13.0, 0.0155, 270.0),
)

_PROFILES: tuple[AtmosphereProfile, ...] = tuple(
    AtmosphereProfile(season, aerosol, vis, k)
    for season, aerosol, vis, k, _ in _TABLE_ROWS
)

_QUOTED_PATH_KM: dict[tuple[Season, Aerosol, float], float] = {
    (season, aerosol, vis): quoted for season, aerosol, vis, _, quoted in _TABLE_ROWS
}


def profile_table() -> tuple[AtmosphereProfile, ...]:
    """The eight built-in atmosphere profiles, fixed order."""
    return _PROFILES


def quoted_path_km(profile: AtmosphereProfile) -> float | None:
    """Quoted equivalent path at t = 0.01 for a built-in row, else None.

    For six of the eight rows this agrees with equivalent_path(k, 0.01)
    to better than 1%; the winter-urban-13km and winter-rural-13km rows
    deviate by several percent and are reported as such.
    """
    return _QUOTED_PATH_KM.get(
        (profile.season, profile.aerosol, profile.visibility_km)
    )


def lookup_profile(
    season: Season,
    aerosol: Aerosol,
    visibility_km: float,
    extra: tuple[AtmosphereProfile, ...] = (),
) -> AtmosphereProfile:
    """Find a profile by condition in the built-in table plus `extra` rows.

    User-supplied rows take precedence over the built-ins, so a custom
    table can override a built-in coefficient.
    """
    for profile in tuple(extra) + _PROFILES:
        if (
            profile.season is season
            and profile.aerosol is aerosol
            and profile.visibility_km == visibility_km
        ):
            return profile
    raise ScenarioError(
        f"no atmosphere profile for season={season.value}, "
        f"aerosol={aerosol.value}, visibility_km={visibility_km:g}"
    )


def load_profiles(path: str) -> tuple[AtmosphereProfile, ...]:
    """Read custom profiles from a delimited text file.

    One row per profile, columns (season, aerosol, visibility_km,
    k_per_km), separated by commas or whitespace; '#' starts a comment.
    """
    rows: list[AtmosphereProfile] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            if len(parts) != 4:
                raise ScenarioError(
                    f"{path}:{lineno}: expected 4 columns "
                    f"(season, aerosol, visibility_km, k_per_km), got {len(parts)}"
                )
            season_txt, aerosol_txt, vis_txt, k_txt = parts
            try:
                season = Season(season_txt.lower())
            except ValueError:
                raise ScenarioError(
                    f"{path}:{lineno}: unknown season {season_txt!r} "
                    f"(expected summer or winter)"
                ) from None
            try:
                aerosol = Aerosol(aerosol_txt.lower())
            except ValueError:
                raise ScenarioError(
                    f"{path}:{lineno}: unknown aerosol class {aerosol_txt!r} "
                    f"(expected urban or rural)"
                ) from None
            try:
                vis = float(vis_txt)
                k = float(k_txt)
            except ValueError as exc:
                raise ScenarioError(f"{path}:{lineno}: {exc}") from None
            try:
                rows.append(AtmosphereProfile(season, aerosol, vis, k))
            except DomainError as exc:
                raise ScenarioError(f"{path}:{lineno}: {exc}") from None
    return tuple(rows)


@dataclass(frozen=True)
class ExplicitTransmittance:
    """Channel fixed directly by a measured or assumed transmittance."""

    value: float

    def __post_init__(self) -> None:
        validate_transmittance(self.value)

    def transmittance(self) -> float:
        return self.value

    def describe(self) -> str:
        return f"fixed transmittance {self.value:g}"


@dataclass(frozen=True)
class ProfilePath:
    """Channel modeled as length_km of atmosphere under a profile."""

    profile: AtmosphereProfile
    length_km: float

    def __post_init__(self) -> None:
        if self.length_km < 0.0:
            raise DomainError(f"length_km must be >= 0, got {self.length_km}")

    def transmittance(self) -> float:
        return transmittance(self.profile.k_per_km, self.length_km)

    def describe(self) -> str:
        return (
            f"{self.length_km:g} km of {self.profile.label} atmosphere "
            f"(k = {self.profile.k_per_km:g} / km)"
        )


@dataclass(frozen=True)
class BromineChannel:
    """Channel whose transmittance is predicted from the gas-cell model."""

    cell: BromineCell
    convention: AbsorbanceConvention = AbsorbanceConvention.DECADIC

    def transmittance(self) -> float:
        return bromine_transmittance(self.cell, self.convention)

    def describe(self) -> str:
        return (
            f"bromine cell ({self.cell.pressure_hpa:g} hPa, "
            f"{self.cell.path_length_m:g} m path, {self.convention.value} absorbance)"
        )


ChannelModel = ExplicitTransmittance | ProfilePath | BromineChannel
