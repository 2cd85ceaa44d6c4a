"""Command-line front end.

Commands:
  run      simulate one scenario (file or preset) and report
  table    equivalent-path comparison for the built-in atmosphere rows
  sweep    vary one numeric parameter and emit plot-ready rows
  presets  list the built-in scenarios with their analytic expectations

Exit codes: 0 success, 1 scenario/parameter validation error, 2
unexpected runtime failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace

from .budget import (
    LinkScenario,
    link_budget,
    preset,
    presets,
    scaled_transmittance,
)
from .channel import ProfilePath
from .errors import ScenarioError
from .protocol import ProtocolConfig, RunMode, qber, run, sift
from .report import (
    build_report,
    path_table_rows,
    render_human,
    render_machine,
)
from .scenario import PROFILE_TABLE_ENV, load_scenario

_DEFAULT_CONFIG = ProtocolConfig(
    mode=RunMode.RANDOM_BB84, n_windows=1_000_000, seed=1, worker_streams=1
)

SWEEP_PARAMS = ("transmittance", "length_km", "dark_rate_hz", "mean_photons_per_window")


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _load_inputs(args: argparse.Namespace) -> tuple[LinkScenario, ProtocolConfig]:
    if args.scenario is not None:
        scenario, config = load_scenario(args.scenario)
    else:
        try:
            scenario = preset(args.preset)
        except KeyError as exc:
            raise ScenarioError(str(exc.args[0])) from None
        config = _DEFAULT_CONFIG
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.windows is not None:
        overrides["n_windows"] = args.windows
    if args.workers is not None:
        overrides["worker_streams"] = args.workers
    if overrides:
        config = replace(config, **overrides)
    return scenario, config


def _simulate(scenario: LinkScenario, config: ProtocolConfig):
    started = time.perf_counter()
    counts = run(
        config,
        scenario.optics,
        scenario.transmittance(),
        scenario.source,
        scenario.detector,
    )
    wall_s = time.perf_counter() - started
    correct, wrong = sift(counts)
    return counts, qber(correct, wrong), wall_s


def cmd_run(args: argparse.Namespace) -> int:
    scenario, config = _load_inputs(args)
    counts, estimate, wall_s = _simulate(scenario, config)
    doc = build_report(
        scenario, config, counts, estimate, link_budget(scenario), wall_s=wall_s
    )
    text = render_machine(doc) if args.format == "machine" else render_human(doc)
    _write(text, args.out)
    return 0


def cmd_table(args: argparse.Namespace) -> int:
    rows = path_table_rows()
    if args.format == "machine":
        lines = ["profile\tk_per_km\tformula_km\tquoted_km\tdeviation_pct\tflagged"]
        for row in rows:
            lines.append(
                f"{row.label}\t{row.k_per_km:.12g}\t{row.formula_km:.12g}"
                f"\t{row.quoted_km:.12g}\t{row.deviation_pct:.12g}"
                f"\t{'true' if row.flagged else 'false'}"
            )
        text = "\n".join(lines) + "\n"
    else:
        lines = [
            "Equivalent horizontal path for 1% transmittance, L = -ln(0.01) / k",
            f"{'profile':<22}{'k / km':>9}{'L formula':>12}{'L quoted':>11}{'deviation':>11}",
        ]
        for row in rows:
            flag = "  !" if row.flagged else ""
            lines.append(
                f"{row.label:<22}{row.k_per_km:>9.4g}{row.formula_km:>12.4f}"
                f"{row.quoted_km:>11.4g}{row.deviation_pct:>10.2f}%{flag}"
            )
        lines.append("Rows marked '!' quote a path that disagrees with the formula by >= 1%.")
        text = "\n".join(lines) + "\n"
    _write(text, args.out)
    return 0


def _sweep_values(start: float, stop: float, steps: int, scale: str) -> list[float]:
    if steps < 1:
        raise ScenarioError(f"steps must be >= 1, got {steps}")
    if steps == 1:
        return [start]
    if scale == "log":
        if start <= 0.0 or stop <= 0.0:
            raise ScenarioError("log-scale sweeps need positive start/stop")
        ratio = (stop / start) ** (1.0 / (steps - 1))
        return [start * ratio**i for i in range(steps)]
    step = (stop - start) / (steps - 1)
    return [start + step * i for i in range(steps)]


def _sweep_scenario(scenario: LinkScenario, param: str, value: float) -> LinkScenario:
    if param == "transmittance":
        return scaled_transmittance(scenario, value)
    if param == "length_km":
        if not isinstance(scenario.channel, ProfilePath):
            raise ScenarioError(
                "length_km sweeps need a profile-based channel "
                "(the scenario fixes transmittance directly)"
            )
        return replace(
            scenario, channel=replace(scenario.channel, length_km=value)
        )
    if param == "dark_rate_hz":
        return replace(
            scenario, detector=replace(scenario.detector, dark_rate_hz=value)
        )
    if param == "mean_photons_per_window":
        return replace(
            scenario, source=replace(scenario.source, mean_photons_per_window=value)
        )
    raise ScenarioError(
        f"unknown sweep parameter {param!r}; supported: {', '.join(SWEEP_PARAMS)}"
    )


def cmd_sweep(args: argparse.Namespace) -> int:
    base_scenario, config = _load_inputs(args)
    values = _sweep_values(args.start, args.stop, args.steps, args.scale)
    lines = [
        f"# sweep {args.param} over {base_scenario.name}, seed {config.seed}, "
        f"{config.total_windows} windows per step",
        "# value\tanalytic_qber\tsim_qber\tsim_stderr\tloss_db\tsecure",
    ]
    for value in values:
        scenario = _sweep_scenario(base_scenario, args.param, value)
        budget = link_budget(scenario)
        _, estimate, _ = _simulate(scenario, config)
        sim_q = f"{estimate.qber:.12g}" if estimate else "undefined"
        sim_err = f"{estimate.stderr:.12g}" if estimate else "undefined"
        analytic = (
            f"{budget.expected_qber:.12g}"
            if budget.expected_qber is not None
            else "undefined"
        )
        lines.append(
            f"{value:.12g}\t{analytic}\t{sim_q}\t{sim_err}"
            f"\t{budget.loss_db:.12g}\t{'true' if budget.secure else 'false'}"
        )
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    lines = []
    if args.format == "machine":
        lines.append("name\ttransmittance\tloss_db\texpected_qber\tsecure")
        for scenario in presets():
            budget = link_budget(scenario)
            expected = (
                f"{budget.expected_qber:.12g}"
                if budget.expected_qber is not None
                else "undefined"
            )
            lines.append(
                f"{scenario.name}\t{scenario.transmittance():.12g}"
                f"\t{budget.loss_db:.12g}\t{expected}"
                f"\t{'true' if budget.secure else 'false'}"
            )
    else:
        for scenario in presets():
            budget = link_budget(scenario)
            expected = (
                f"{100.0 * budget.expected_qber:.4f} %"
                if budget.expected_qber is not None
                else "undefined"
            )
            verdict = "secure" if budget.secure else "NOT secure"
            lines.append(f"{scenario.name}")
            lines.append(f"  {scenario.description}")
            lines.append(
                f"  loss {budget.loss_db:.4g} dB, analytic QBER {expected}, {verdict}"
            )
    _write("\n".join(lines) + "\n", args.out)
    return 0


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--scenario", metavar="PATH", help="scenario TOML file")
    group.add_argument("--preset", metavar="NAME", help="built-in scenario name")
    parser.add_argument("--seed", type=int, help="override the random seed")
    parser.add_argument(
        "--windows",
        type=int,
        help="override n_windows (per setting in setting_scan mode)",
    )
    parser.add_argument("--workers", type=int, help="override worker_streams")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bb84sim",
        description=(
            "Photon-level BB84 simulator and analytic link-budget calculator "
            "for free-space and absorbing-cell channels."
        ),
        epilog=(
            f"Set {PROFILE_TABLE_ENV} to a delimited file of extra atmosphere "
            f"profiles (season aerosol visibility_km k_per_km)."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario and report")
    _add_scenario_args(p_run)
    p_run.add_argument("--format", choices=("human", "machine"), default="human")
    p_run.add_argument("--out", metavar="PATH", help="write the report to a file")
    p_run.set_defaults(func=cmd_run)

    p_table = sub.add_parser(
        "table", help="equivalent-path table for the built-in profiles"
    )
    p_table.add_argument("--format", choices=("human", "machine"), default="human")
    p_table.add_argument("--out", metavar="PATH")
    p_table.set_defaults(func=cmd_table)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter, emit plot rows")
    _add_scenario_args(p_sweep)
    p_sweep.add_argument("param", choices=SWEEP_PARAMS, help="parameter to sweep")
    p_sweep.add_argument("--start", type=float, required=True)
    p_sweep.add_argument("--stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--scale", choices=("linear", "log"), default="linear")
    p_sweep.add_argument("--out", metavar="PATH")
    p_sweep.set_defaults(func=cmd_sweep)

    p_presets = sub.add_parser("presets", help="list built-in scenarios")
    p_presets.add_argument("--format", choices=("human", "machine"), default="human")
    p_presets.add_argument("--out", metavar="PATH")
    p_presets.set_defaults(func=cmd_presets)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        # ScenarioError and the domain errors are ValueErrors: bad inputs.
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
