"""Report assembly and rendering (human text and machine key-values).

The machine format is a flat `key<TAB>value` emission with a fixed key
order, one value per line: easy to diff, easy to parse with cut/awk,
and byte-identical across invocations of the same seeded run (it
deliberately omits wall time). The human format renders the same
numbers with units and context. Undefined quantities (for example the
QBER of a run with no sifted events) appear as the literal string
`undefined`, never as NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .budget import LinkBudgetReport, LinkScenario
from .channel import (
    AbsorbanceConvention,
    BromineCell,
    bromine_transmittance,
    equivalent_path,
    profile_table,
    quoted_path_km,
)
from .protocol import (
    CELL_KEYS,
    ProtocolConfig,
    QberEstimate,
    RunCounts,
    STATE_NAMES,
    sift,
)

# Transmittance the absorbing-cell scenarios are anchored to; the
# chemistry prediction is reported against it in every run.
MEASURED_CELL_TRANSMITTANCE = 0.01


@dataclass(frozen=True)
class PathTableRow:
    """One atmosphere row: recomputed vs quoted equivalent path."""

    label: str
    k_per_km: float
    formula_km: float
    quoted_km: float
    # Relative deviation of the recomputed path from the quoted one, in
    # percent of the quoted value.
    deviation_pct: float

    @property
    def flagged(self) -> bool:
        """True when the recomputed path misses the quoted one by >= 1%."""
        return abs(self.deviation_pct) >= 1.0


def path_table_rows(t: float = MEASURED_CELL_TRANSMITTANCE) -> tuple[PathTableRow, ...]:
    """Equivalent-path comparison for every built-in profile at t."""
    rows = []
    for profile in profile_table():
        quoted = quoted_path_km(profile)
        formula = equivalent_path(profile.k_per_km, t)
        rows.append(
            PathTableRow(
                label=profile.label,
                k_per_km=profile.k_per_km,
                formula_km=formula,
                quoted_km=quoted,
                deviation_pct=100.0 * (formula - quoted) / quoted,
            )
        )
    return tuple(rows)


def bromine_crosscheck() -> tuple[float, float]:
    """(decadic, natural) predicted transmittance of the default cell."""
    cell = BromineCell()
    return (
        bromine_transmittance(cell, AbsorbanceConvention.DECADIC),
        bromine_transmittance(cell, AbsorbanceConvention.NATURAL),
    )


@dataclass(frozen=True)
class ReportDocument:
    """Everything one simulated run produced, ready to render."""

    scenario: LinkScenario
    config: ProtocolConfig
    counts: RunCounts
    estimate: QberEstimate | None
    budget: LinkBudgetReport
    transmittance: float
    sifted_correct: int
    sifted_wrong: int
    wall_s: float | None = None


def build_report(
    scenario: LinkScenario,
    config: ProtocolConfig,
    counts: RunCounts,
    estimate: QberEstimate | None,
    budget: LinkBudgetReport,
    wall_s: float | None = None,
) -> ReportDocument:
    correct, wrong = sift(counts)
    return ReportDocument(
        scenario=scenario,
        config=config,
        counts=counts,
        estimate=estimate,
        budget=budget,
        transmittance=scenario.transmittance(),
        sifted_correct=correct,
        sifted_wrong=wrong,
        wall_s=wall_s,
    )


def _fmt(value: object) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "undefined"
        return f"{value:.12g}"
    return str(value)


def machine_items(doc: ReportDocument) -> list[tuple[str, object]]:
    """Ordered (key, value) pairs of the machine emission.

    Field names carry their units (_nm, _hz, _db, _km) so downstream
    tooling never has to guess.
    """
    s = doc.scenario
    items: list[tuple[str, object]] = [
        ("scenario", s.name),
        ("mode", doc.config.mode),
        ("seed", doc.config.seed),
        ("n_windows", doc.config.n_windows),
        ("worker_streams", doc.config.worker_streams),
        ("total_windows", doc.config.total_windows),
        ("wavelength_nm", s.source.wavelength_nm),
        ("mean_photons_per_window", s.source.mean_photons_per_window),
        ("extinction_ratio", s.optics.extinction_ratio),
        ("misalignment_deg", s.optics.misalignment_deg),
        ("bob_efficiency", s.optics.bob_efficiency),
        ("quantum_efficiency", s.detector.quantum_efficiency),
        ("dead_time_ns", s.detector.dead_time_ns),
        ("dark_rate_hz_per_detector", s.detector.dark_rate_hz),
        ("transmittance", doc.transmittance),
        ("loss_db", doc.budget.loss_db),
    ]
    for key in CELL_KEYS:
        bit, alice_basis, bob_basis = key
        cell = doc.counts.cells[key]
        tag = f"count_{STATE_NAMES[(bit, alice_basis)]}_{bob_basis.value}"
        items.append((f"{tag}_correct", cell.correct_clicks))
        items.append((f"{tag}_wrong", cell.wrong_clicks))
        items.append((f"{tag}_double", cell.double_clicks))
        items.append((f"{tag}_empty", cell.empty_windows))
    items += [
        ("sifted_correct", doc.sifted_correct),
        ("sifted_wrong", doc.sifted_wrong),
        ("n_sifted", doc.estimate.n_sifted if doc.estimate else 0),
        ("qber", doc.estimate.qber if doc.estimate else None),
        ("qber_stderr", doc.estimate.stderr if doc.estimate else None),
        ("expected_qber", doc.budget.expected_qber),
        ("sifted_rate_hz", doc.budget.sifted_rate_hz),
        ("secure", doc.budget.secure),
        ("limiting_factor", doc.budget.limiting_factor),
        ("reference_qber", s.reference_qber),
        ("reference_loss_db", s.reference_loss_db),
        ("reference_rate_hz", s.reference_rate_hz),
    ]
    decadic, natural = bromine_crosscheck()
    items += [
        ("crosscheck_bromine_decadic", decadic),
        ("crosscheck_bromine_natural", natural),
        ("crosscheck_bromine_measured", MEASURED_CELL_TRANSMITTANCE),
    ]
    for row in path_table_rows():
        tag = "path_" + row.label.replace("-", "_")
        items.append((f"{tag}_k_per_km", row.k_per_km))
        items.append((f"{tag}_formula_km", row.formula_km))
        items.append((f"{tag}_quoted_km", row.quoted_km))
        items.append((f"{tag}_deviation_pct", row.deviation_pct))
    return items


def render_machine(doc: ReportDocument) -> str:
    return "".join(f"{key}\t{_fmt(value)}\n" for key, value in machine_items(doc))


def render_human(doc: ReportDocument) -> str:
    s = doc.scenario
    lines = [f"BB84 link simulation: {s.name}", s.description, ""]

    lines.append("Run")
    lines.append(f"  mode              {doc.config.mode.value}")
    lines.append(
        f"  windows           {doc.config.total_windows:,} "
        f"(seed {doc.config.seed}, {doc.config.worker_streams} worker stream(s))"
    )
    if doc.wall_s is not None:
        lines.append(f"  wall time         {doc.wall_s:.2f} s")
    lines.append("")

    lines.append("Parameters")
    lines.append(f"  wavelength        {_fmt(s.source.wavelength_nm)} nm")
    lines.append(
        f"  photons/window    {_fmt(s.source.mean_photons_per_window)} (channel input)"
    )
    lines.append(f"  extinction ratio  {_fmt(s.optics.extinction_ratio)}:1")
    lines.append(f"  misalignment      {_fmt(s.optics.misalignment_deg)} deg")
    lines.append(f"  quantum eff.      {_fmt(s.detector.quantum_efficiency)}")
    lines.append(f"  dead time         {_fmt(s.detector.dead_time_ns)} ns")
    lines.append(f"  dark rate         {_fmt(s.detector.dark_rate_hz)} Hz per detector")
    lines.append("")

    lines.append("Channel")
    lines.append(f"  {s.channel.describe()}")
    lines.append(f"  transmittance     {_fmt(doc.transmittance)}")
    lines.append(f"  loss              {doc.budget.loss_db:.4g} dB")
    lines.append("")

    lines.append("Counts (Alice state x Bob basis)")
    header = f"  {'state':<6}{'basis':<7}{'correct':>12}{'wrong':>12}{'double':>10}{'empty':>14}"
    lines.append(header)
    for key in CELL_KEYS:
        bit, alice_basis, bob_basis = key
        cell = doc.counts.cells[key]
        lines.append(
            f"  {STATE_NAMES[(bit, alice_basis)]:<6}{bob_basis.value:<7}"
            f"{cell.correct_clicks:>12,}{cell.wrong_clicks:>12,}"
            f"{cell.double_clicks:>10,}{cell.empty_windows:>14,}"
        )
    lines.append("")

    lines.append("Results")
    lines.append(
        f"  sifted events     {doc.sifted_correct + doc.sifted_wrong:,} "
        f"(correct {doc.sifted_correct:,}, wrong {doc.sifted_wrong:,})"
    )
    if doc.estimate is None:
        lines.append("  QBER              undefined (no sifted events)")
    else:
        lines.append(
            f"  QBER              {100.0 * doc.estimate.qber:.4f} % "
            f"+/- {100.0 * doc.estimate.stderr:.4f} pp"
        )
    if doc.budget.expected_qber is None:
        lines.append("  analytic QBER     undefined (no clicks expected)")
    else:
        lines.append(f"  analytic QBER     {100.0 * doc.budget.expected_qber:.4f} %")
    lines.append(f"  sifted rate       {doc.budget.sifted_rate_hz:.6g} /s (estimate)")
    verdict = "SECURE" if doc.budget.secure else "NOT SECURE"
    lines.append(
        f"  verdict           {verdict} "
        f"(limiting factor: {doc.budget.limiting_factor.value})"
    )
    references = [
        ("QBER", s.reference_qber, lambda v: f"{100.0 * v:.4g} %"),
        ("loss", s.reference_loss_db, lambda v: f"{v:.4g} dB"),
        ("rate", s.reference_rate_hz, lambda v: f"{v:.4g} /s"),
    ]
    quoted = [f"{name} {fmt(value)}" for name, value, fmt in references if value is not None]
    if quoted:
        lines.append(f"  quoted values     {', '.join(quoted)}")
    lines.append("")

    decadic, natural = bromine_crosscheck()
    lines.append("Cross-checks")
    lines.append(
        f"  absorbing-cell physics: T = {decadic:.6g} (decadic) / "
        f"{natural:.6g} (natural) vs measured {MEASURED_CELL_TRANSMITTANCE:g}"
        f" -- neither convention reproduces the measurement"
    )
    lines.append(f"  equivalent paths at t = {MEASURED_CELL_TRANSMITTANCE:g}:")
    lines.append(
        f"    {'profile':<22}{'k / km':>9}{'L formula':>12}{'L quoted':>11}{'dev':>9}"
    )
    for row in path_table_rows():
        flag = "  !" if row.flagged else ""
        lines.append(
            f"    {row.label:<22}{row.k_per_km:>9.4g}{row.formula_km:>12.4f}"
            f"{row.quoted_km:>11.4g}{row.deviation_pct:>8.2f}%{flag}"
        )
    lines.append("")
    return "\n".join(lines)
