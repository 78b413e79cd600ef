"""Command-line front end.

Subcommands: ``reproduce``, ``bell``, ``lp``, ``paradox``, ``dump-state``.
Options come from an optional JSON config file and are overridden by flags.
Exit codes: 0 success, 1 a check failed, 2 bad arguments, 3 numeric error.
The worker count of the LP sweeps is read from ``INTERWOVEN_WORKERS``.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import bell, lhv, paradox, reproduce, symbolic
from . import network as net

EXIT_OK, EXIT_FAIL, EXIT_ARGS, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("reproduce", "bell", "lp", "paradox", "dump-state")
SCENARIOS = ("on-off", "phases-only")
BACKENDS = ("symbolic", "numeric", "both")

# per-command defaults for options left unset
DEFAULT_GRID = {"bell": 0.01 * math.pi, "lp": 0.1 * math.pi}
DEFAULT_G = [0.1]


class ArgumentError(ValueError):
    """Invalid option value (exit code 2)."""


def parse_angle(text) -> float:
    """``"0.1pi"``, ``"pi/3"``, ``"-2pi/3"`` or a plain number of radians."""
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower().replace(" ", "").replace("*", "")
    try:
        if "pi" not in t:
            return float(t)
        before, after = t.split("pi", 1)
        coeff = {"": 1.0, "+": 1.0, "-": -1.0}[before] if before in ("", "+", "-") else float(before)
        if after and not after.startswith("/"):
            raise ValueError(after)
        return coeff * math.pi / (float(after[1:]) if after else 1.0)
    except ValueError:
        raise ArgumentError(f"cannot parse angle {text!r}") from None


def _split(text) -> list:
    if isinstance(text, (list, tuple)):
        return list(text)
    return [t for t in re.split(r"[,\s]+", str(text).strip()) if t]


def _pump(token) -> bool:
    if isinstance(token, bool):
        return token
    t = str(token).lower()
    if t in ("on", "1", "true"):
        return True
    if t in ("off", "0", "false"):
        return False
    raise ArgumentError(f"pump setting must be on/off, got {token!r}")


@dataclass
class RunConfig:
    """Resolved options of one run; ``to_dict`` is the canonical form."""

    command: str
    parties: int = 3
    g: list = field(default_factory=lambda: list(DEFAULT_G))
    phases: list | None = None
    grid_step: float | None = None
    scenario: str = "on-off"
    backend: str = "symbolic"
    order: int | None = None
    visibility: float = 1.0
    pumps: list | None = None
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ArgumentError(f"unknown command {self.command!r}")
        self.parties = int(self.parties)
        if not 2 <= self.parties <= lhv.MAX_PARTIES:
            raise ArgumentError(f"--parties must be in 2..{lhv.MAX_PARTIES}")
        self.g = [float(v) for v in (_split(self.g) if not isinstance(self.g, (int, float))
                                     else [self.g])]
        if not self.g:
            raise ArgumentError("--g needs at least one value")
        for v in self.g:
            if abs(v) > net.G_GUARD:
                raise ArgumentError(f"|g| = {v:g} exceeds the validity guard {net.G_GUARD}")
        if self.phases is not None:
            self.phases = [parse_angle(p) for p in _split(self.phases)]
            if len(self.phases) not in (1, self.parties):
                raise ArgumentError(f"--phases needs 1 (the sum) or {self.parties} values")
        if self.grid_step is None:
            self.grid_step = DEFAULT_GRID.get(self.command)
        else:
            self.grid_step = parse_angle(self.grid_step)
            if self.grid_step <= 0:
                raise ArgumentError("--grid-step must be positive")
        if self.scenario not in SCENARIOS:
            raise ArgumentError(f"--scenario must be one of {SCENARIOS}")
        if self.backend not in BACKENDS:
            raise ArgumentError(f"--backend must be one of {BACKENDS}")
        if self.order is None:
            self.order = max(reproduce.TABLE_ORDER, self.parties)
        self.order = int(self.order)
        if not 1 <= self.order <= symbolic.ORDER_GUARD:
            raise ArgumentError(f"--order must be in 1..{symbolic.ORDER_GUARD}")
        self.visibility = float(self.visibility)
        if not 0 <= self.visibility <= 1:
            raise ArgumentError("--visibility must be in [0, 1]")
        if self.pumps is not None:
            self.pumps = [_pump(p) for p in _split(self.pumps)]
            if len(self.pumps) != self.parties:
                raise ArgumentError(f"--pumps needs {self.parties} values")

    @property
    def phase_sum(self) -> float | None:
        return None if self.phases is None else sum(self.phases)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ArgumentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interwoven-pdc",
        description="Interwoven down-conversion networks: series, Bell tests, LHV LP, paradox.",
        epilog=f"Exit codes: 0 ok, 1 check failed, 2 bad arguments, 3 numeric error. "
               f"Set {lhv.WORKERS_ENV} for parallel LP sweeps.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file with option defaults (flags override)")
    parser.add_argument("--parties", type=int, help="number of parties N (default 3)")
    parser.add_argument("--g", help="coupling(s), comma separated (default 0.1)")
    parser.add_argument("--phases", help="phase sum, or one phase per party; "
                                         "accepts pi notation such as 2pi/3")
    parser.add_argument("--grid-step", help="phase grid step (bell 0.01pi, lp 0.1pi)")
    parser.add_argument("--scenario", choices=SCENARIOS, help="LP pump scenario (default on-off)")
    parser.add_argument("--backend", choices=BACKENDS, help="probability engine (default symbolic)")
    parser.add_argument("--order", type=int, help="amplitude truncation order (default max(4, N))")
    parser.add_argument("--visibility", type=float, help="interference visibility (default 1)")
    parser.add_argument("--pumps", help="dump-state pump pattern, e.g. off,off,on")
    parser.add_argument("--out", help="directory for report files")
    return parser


def resolve_config(argv=None) -> RunConfig:
    args = build_parser().parse_args(argv)
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ArgumentError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise ArgumentError("config must be a JSON object")
    data["command"] = args.command
    for name in ("parties", "g", "phases", "grid_step", "scenario", "backend", "order",
                 "visibility", "pumps", "out"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    return RunConfig.from_dict(data)


# --- output -----------------------------------------------------------------

def dumps_json(data) -> str:
    return json.dumps(data, indent=1, sort_keys=True) + "\n"


def _emit(config: RunConfig, files: dict[str, str], text: str):
    print(text, end="" if text.endswith("\n") else "\n")
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, content in sorted(files.items()):
            (out / name).write_text(content)


def _fmt(v) -> str:
    return f"{float(v):.12g}"


# --- reproduce --------------------------------------------------------------

def cmd_reproduce(config: RunConfig) -> int:
    if config.parties != reproduce.PARTIES:
        raise ArgumentError("the reference tables are for 3 parties")
    rows = []
    if config.backend in ("symbolic", "both"):
        rows += reproduce.amplitude_rows(config.order) + reproduce.probability_rows(config.order)
    if config.backend in ("numeric", "both"):
        phase_sum = config.phase_sum if config.phases is not None else bell.DEFAULT_PHASE
        rows += reproduce.deviation_rows(config.g, phase_sum)
    report = reproduce.summary(rows)
    report["config"] = config.to_dict()
    lines = [f"{s}: {c['pass']} pass, {c['fail']} fail, {c['skipped']} skipped"
             for s, c in sorted(report["sections"].items())]
    lines += [f"FAIL {f['section']} {f['item']} {f['term']}: expected {f['expected']}, "
              f"got {f['computed']}" for f in report["failures"]]
    lines.append("all pass" if report["all_pass"] else "FAILED")
    _emit(config, {"reproduce.csv": reproduce.rows_to_csv(rows),
                   "reproduce.json": dumps_json(report)}, "\n".join(lines))
    return EXIT_OK if report["all_pass"] else EXIT_FAIL


# --- bell -------------------------------------------------------------------

def inequality_columns(parties: int) -> dict:
    if parties == 3:
        return {"lifted_ch": bell.lifted_ch_value, "symmetrized_ch": bell.symmetrized_ch_value,
                "genuine": bell.genuine_tripartite_value}
    if parties == 4:
        return {"doubly_lifted_ch": bell.doubly_lifted_ch_value}
    return {"lifted_ch": lambda src: bell.n_lifted_ch_value(src, parties)}


def violation_windows(phases, values) -> list[list[float]]:
    """Maximal runs of grid points with a positive value, as ``[first, last]``."""
    windows, start, last = [], None, None
    for phi, v in zip(phases, values):
        if v > 0:
            start = phi if start is None else start
            last = phi
        elif start is not None:
            windows.append([start, last])
            start = None
    if start is not None:
        windows.append([start, last])
    return windows


def _bell_sources(config: RunConfig, g: float):
    """``phase_sum -> {backend: probability source}`` factories."""
    makers = {}
    if config.backend in ("symbolic", "both"):
        makers["symbolic"] = lambda s: bell.SymbolicModel(config.parties, g, s,
                                                          config.visibility, config.order)
    if config.backend in ("numeric", "both"):
        averaged = (bell.phase_averaged_behavior(g, config.parties)
                    if config.visibility < 1 else None)

        def numeric(s):
            if averaged is None:
                return bell.on_off_behavior(g, s, config.parties)
            return bell.on_off_behavior(g, s, config.parties).mix(averaged, config.visibility)
        makers["numeric"] = numeric
    return makers


def cmd_bell(config: RunConfig) -> int:
    columns = inequality_columns(config.parties)
    grid = lhv._grid(config.grid_step)
    header, lines, summary = None, [], {"config": config.to_dict(), "results": []}
    for g in config.g:
        makers = _bell_sources(config, g)
        names = [f"{c}_{b}" if len(makers) > 1 else c for b in makers for c in columns]
        series = {n: [] for n in names}
        for s in grid:
            for b, make in makers.items():
                src = make(s)
                for c, fn in columns.items():
                    series[f"{c}_{b}" if len(makers) > 1 else c].append(float(fn(src)))
        header = ["g", "phase_sum"] + names
        for i, s in enumerate(grid):
            lines.append([_fmt(g), _fmt(s)] + [_fmt(series[n][i]) for n in names])
        scale = abs(g) ** (2 * config.parties)
        for n in names:
            values = series[n]
            k = max(range(len(values)), key=values.__getitem__)
            summary["results"].append({
                "g": g, "inequality": n, "max": values[k], "argmax": grid[k],
                "max_over_g2n": values[k] / scale if scale else None,
                "windows": violation_windows(grid, values), "violated": values[k] > 0})
    csv_text = ",".join(header) + "\n" + "".join(",".join(row) + "\n" for row in lines)
    text = "\n".join(
        f"g={r['g']:g} {r['inequality']}: max {r['max']:.6g} at {r['argmax'] / math.pi:.4g}pi"
        + (f" (={r['max_over_g2n']:.6g} |g|^{2 * config.parties})"
           if r["max_over_g2n"] is not None else "")
        + "; windows " + (", ".join(f"[{a / math.pi:.3g}pi, {b / math.pi:.3g}pi]"
                                    for a, b in r["windows"]) or "none")
        for r in summary["results"])
    _emit(config, {"bell.csv": csv_text, "bell.json": dumps_json(summary)}, text)
    return EXIT_OK


# --- lp ---------------------------------------------------------------------

def _on_off_check(report: lhv.SweepReport) -> list[dict]:
    """Cells where the LP verdict and the sign of the lifted CH value disagree."""
    return [{"g": row.g, "phase_sum": row.settings[0], "ch": row.ch, "feasible": row.feasible}
            for row in report.rows if (row.ch > 0) == row.feasible]


def cmd_lp(config: RunConfig) -> int:
    report = lhv.phase_sweep_lp(config.parties, config.g, config.grid_step, config.scenario)
    summary = report.to_dict()
    summary["config"] = config.to_dict()
    lines = [f"{config.scenario}: {len(report.rows)} cells, {len(report.infeasible)} infeasible"]
    ok = True
    if config.scenario == "on-off":
        bad = _on_off_check(report)
        summary["ch_sign_mismatches"] = bad
        ok = not bad
        for row in report.infeasible:
            lines.append(f"  g={row.g:g} phase_sum={row.settings[0] / math.pi:.4g}pi "
                         f"violation={row.violation:.6g} match={row.match}")
        lines.append("infeasible exactly where CH > 0" if ok
                     else f"{len(bad)} cells disagree with the sign of CH")
    elif max(abs(g) for g in config.g) <= paradox.SMALL_G:
        ok = report.all_feasible
        lines.append("all feasible" if ok else "infeasible cells found for |g| <= 0.1")
    summary["pass"] = ok
    _emit(config, {"lp.csv": report.to_csv(), "lp.json": dumps_json(summary)}, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# --- paradox ----------------------------------------------------------------

def cmd_paradox(config: RunConfig) -> int:
    if config.parties != paradox.PARTIES:
        raise ArgumentError("the paradox is stated for 3 parties")
    phases = config.phase_sum if config.phases is not None else math.pi
    reports, ok, lines = [], True, []
    for g in config.g:
        rep = paradox.paradox_report(g, phases)
        rep["g"] = g
        reports.append(rep)
        budget = rep["budget"]
        lines.append(f"g={g:g}: gap {rep['paradox']['gap']:.6g} "
                     f"(lhs {rep['paradox']['lhs']:.6g}, rhs {rep['paradox']['rhs']:.6g}), "
                     f"budget {budget['budget']:.6g}, "
                     f"max deviation {rep['implications']['max_deviation']:.6g}"
                     + ("" if budget["in_regime"] else " [outside small-g regime]"))
        if budget["in_regime"] and not (rep["paradox"]["gap"] > 0 and budget["survives"]):
            ok = False
    lines.append("paradox survives" if ok else "paradox does not survive")
    data = {"config": config.to_dict(), "reports": reports, "pass": ok}
    _emit(config, {"paradox.json": dumps_json(data)}, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# --- dump-state -------------------------------------------------------------

def cmd_dump_state(config: RunConfig) -> int:
    pumps = config.pumps or [False] * config.parties
    if config.backend == "numeric":
        phases = config.phases or [0.0]
        if len(phases) == 1:
            phases = [phases[0]] + [0.0] * (config.parties - 1)
        network = net.build_ring_network(config.parties, config.g[0])
        result = net.evolve_network(network, list(zip(pumps, phases)))
        text = dumps_json(result.to_dict())
    elif config.backend == "symbolic":
        state = symbolic.evolve_network_symbolic(config.parties, tuple(pumps), config.order)
        text = symbolic.dumps_symbolic_state(state) + "\n"
    else:
        raise ArgumentError("dump-state needs --backend symbolic or numeric")
    _emit(config, {"state.json": text}, text)
    return EXIT_OK


HANDLERS = {"reproduce": cmd_reproduce, "bell": cmd_bell, "lp": cmd_lp,
            "paradox": cmd_paradox, "dump-state": cmd_dump_state}


def main(argv=None) -> int:
    try:
        config = resolve_config(argv)
        return HANDLERS[config.command](config)
    except SystemExit as exc:
        # argparse reports bad usage with code 2
        return int(exc.code or 0)
    except (ArgumentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (ArithmeticError, MemoryError) as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
