"""Scenario-file ingestion: TOML in, validated run inputs out.

A scenario file has sections [source], [optics], [channel], [detector],
[protocol]. Only [channel] is mandatory, and it must contain exactly one
variant: a `transmittance` value, a [channel.profile] sub-table, or a
[channel.bromine] sub-table. Every other field falls back to the
calibrated defaults, so a minimal file is just a channel description.

Unknown sections or keys are rejected rather than ignored: a scenario
that validates must run without further domain errors, and silently
dropping a typo like `darkrate_hz` would undermine that.
"""

from __future__ import annotations

import os
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]

from .budget import (
    LinkScenario,
    calibrated_detector,
    calibrated_optics,
    calibrated_source,
)
from .channel import (
    AbsorbanceConvention,
    Aerosol,
    AtmosphereProfile,
    BromineCell,
    BromineChannel,
    ChannelModel,
    ExplicitTransmittance,
    ProfilePath,
    Season,
    load_profiles,
    lookup_profile,
)
from .detector import DetectorParams, SourceParams
from .errors import DomainError, ScenarioError
from .optics import OpticalChain
from .protocol import ProtocolConfig, RunMode

# Points at an optional user profile table (see channel.load_profiles).
PROFILE_TABLE_ENV = "BB84SIM_PROFILES"

_SECTIONS = ("source", "optics", "channel", "detector", "protocol")


def _require_table(value: object, where: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(f"{where}: expected a table, got {type(value).__name__}")
    return value


def _reject_unknown(table: dict, where: str, known: tuple[str, ...]) -> None:
    for key in table:
        if key not in known:
            raise ScenarioError(
                f"{where}.{key}: unknown field (expected one of: {', '.join(known)})"
            )


def _number(table: dict, where: str, key: str, default: float) -> float:
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def _integer(table: dict, where: str, key: str, default: int) -> int:
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}.{key}: expected an integer, got {value!r}")
    return value


def _text(table: dict, where: str, key: str, default: str) -> str:
    value = table.get(key, default)
    if not isinstance(value, str):
        raise ScenarioError(f"{where}.{key}: expected a string, got {value!r}")
    return value


def user_profiles() -> tuple[AtmosphereProfile, ...]:
    """Profiles from the file named by BB84SIM_PROFILES, if set."""
    path = os.environ.get(PROFILE_TABLE_ENV)
    if not path:
        return ()
    try:
        return load_profiles(path)
    except OSError as exc:
        raise ScenarioError(f"cannot read profile table {path!r}: {exc}") from exc


def _build_channel(section: dict) -> ChannelModel:
    where = "channel"
    _reject_unknown(section, where, ("transmittance", "profile", "bromine"))
    variants = [key for key in ("transmittance", "profile", "bromine") if key in section]
    if len(variants) != 1:
        raise ScenarioError(
            f"{where}: exactly one of transmittance / profile / bromine is "
            f"required, got {variants or 'none'}"
        )
    variant = variants[0]
    try:
        if variant == "transmittance":
            return ExplicitTransmittance(_number(section, where, "transmittance", 0.0))
        if variant == "profile":
            sub = _require_table(section["profile"], f"{where}.profile")
            _reject_unknown(
                sub,
                f"{where}.profile",
                ("season", "aerosol", "visibility_km", "length_km"),
            )
            for key in ("season", "aerosol", "visibility_km", "length_km"):
                if key not in sub:
                    raise ScenarioError(f"{where}.profile.{key}: required field missing")
            season_txt = _text(sub, f"{where}.profile", "season", "")
            aerosol_txt = _text(sub, f"{where}.profile", "aerosol", "")
            try:
                season = Season(season_txt.lower())
            except ValueError:
                raise ScenarioError(
                    f"{where}.profile.season: unknown season {season_txt!r} "
                    f"(expected summer or winter)"
                ) from None
            try:
                aerosol = Aerosol(aerosol_txt.lower())
            except ValueError:
                raise ScenarioError(
                    f"{where}.profile.aerosol: unknown aerosol class "
                    f"{aerosol_txt!r} (expected urban or rural)"
                ) from None
            profile = lookup_profile(
                season,
                aerosol,
                _number(sub, f"{where}.profile", "visibility_km", 0.0),
                extra=user_profiles(),
            )
            return ProfilePath(
                profile, _number(sub, f"{where}.profile", "length_km", 0.0)
            )
        sub = _require_table(section["bromine"], f"{where}.bromine")
        _reject_unknown(
            sub,
            f"{where}.bromine",
            ("pressure_hpa", "temperature_k", "path_m", "epsilon", "convention"),
        )
        defaults = BromineCell()
        cell = BromineCell(
            molar_absorptivity=_number(
                sub, f"{where}.bromine", "epsilon", defaults.molar_absorptivity
            ),
            pressure_hpa=_number(
                sub, f"{where}.bromine", "pressure_hpa", defaults.pressure_hpa
            ),
            temperature_k=_number(
                sub, f"{where}.bromine", "temperature_k", defaults.temperature_k
            ),
            path_length_m=_number(
                sub, f"{where}.bromine", "path_m", defaults.path_length_m
            ),
        )
        convention_txt = _text(sub, f"{where}.bromine", "convention", "decadic")
        try:
            convention = AbsorbanceConvention(convention_txt.lower())
        except ValueError:
            raise ScenarioError(
                f"{where}.bromine.convention: unknown convention "
                f"{convention_txt!r} (expected decadic or natural)"
            ) from None
        return BromineChannel(cell, convention)
    except DomainError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def build_scenario(data: dict, name: str) -> tuple[LinkScenario, ProtocolConfig]:
    """Validate a parsed TOML document and assemble the run inputs."""
    _require_table(data, "scenario")
    for key in data:
        if key not in _SECTIONS:
            raise ScenarioError(
                f"{key}: unknown section (expected one of: {', '.join(_SECTIONS)})"
            )
    if "channel" not in data:
        raise ScenarioError("channel: required section missing")

    default_source = calibrated_source()
    default_optics = calibrated_optics()
    default_detector = calibrated_detector()

    source_tbl = _require_table(data.get("source", {}), "source")
    _reject_unknown(source_tbl, "source", ("wavelength_nm", "mean_photons_per_window"))
    optics_tbl = _require_table(data.get("optics", {}), "optics")
    _reject_unknown(optics_tbl, "optics", ("extinction_ratio", "misalignment_deg"))
    detector_tbl = _require_table(data.get("detector", {}), "detector")
    _reject_unknown(
        detector_tbl, "detector", ("quantum_efficiency", "dead_time_ns", "dark_rate_hz")
    )
    protocol_tbl = _require_table(data.get("protocol", {}), "protocol")
    _reject_unknown(
        protocol_tbl, "protocol", ("mode", "n_windows", "seed", "worker_streams")
    )

    try:
        source = SourceParams(
            mean_photons_per_window=_number(
                source_tbl,
                "source",
                "mean_photons_per_window",
                default_source.mean_photons_per_window,
            ),
            wavelength_nm=_number(
                source_tbl, "source", "wavelength_nm", default_source.wavelength_nm
            ),
        )
    except DomainError as exc:
        raise ScenarioError(f"source: {exc}") from exc
    try:
        optics = OpticalChain(
            extinction_ratio=_number(
                optics_tbl,
                "optics",
                "extinction_ratio",
                default_optics.extinction_ratio,
            ),
            misalignment_deg=_number(
                optics_tbl,
                "optics",
                "misalignment_deg",
                default_optics.misalignment_deg,
            ),
        )
    except DomainError as exc:
        raise ScenarioError(f"optics: {exc}") from exc
    try:
        detector = DetectorParams(
            quantum_efficiency=_number(
                detector_tbl,
                "detector",
                "quantum_efficiency",
                default_detector.quantum_efficiency,
            ),
            dead_time_ns=_number(
                detector_tbl, "detector", "dead_time_ns", default_detector.dead_time_ns
            ),
            dark_rate_hz=_number(
                detector_tbl, "detector", "dark_rate_hz", default_detector.dark_rate_hz
            ),
        )
    except DomainError as exc:
        raise ScenarioError(f"detector: {exc}") from exc

    channel = _build_channel(_require_table(data["channel"], "channel"))

    mode_txt = _text(protocol_tbl, "protocol", "mode", RunMode.RANDOM_BB84.value)
    try:
        mode = RunMode(mode_txt.lower())
    except ValueError:
        raise ScenarioError(
            f"protocol.mode: unknown mode {mode_txt!r} "
            f"(expected random_bb84 or setting_scan)"
        ) from None
    try:
        config = ProtocolConfig(
            mode=mode,
            n_windows=_integer(protocol_tbl, "protocol", "n_windows", 1_000_000),
            seed=_integer(protocol_tbl, "protocol", "seed", 1),
            worker_streams=_integer(protocol_tbl, "protocol", "worker_streams", 1),
        )
    except DomainError as exc:
        raise ScenarioError(f"protocol: {exc}") from exc

    scenario = LinkScenario(
        name=name,
        description=f"scenario file {name}",
        channel=channel,
        source=source,
        optics=optics,
        detector=detector,
    )
    return scenario, config


def load_scenario(path: str) -> tuple[LinkScenario, ProtocolConfig]:
    """Parse and validate a scenario file; errors carry section.field names."""
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path!r}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        # The decoder's message already names the line and column.
        raise ScenarioError(f"{path}: {exc}") from exc
    return build_scenario(data, Path(path).stem)
