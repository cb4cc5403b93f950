"""Experiment runner: sweep protocol x nodes x speed x TTL, emit CSV.

Configuration comes from a flat ``key=value`` file, ``DTNSIM_``-prefixed
environment variables, and command-line flags, in increasing precedence.
Every cell of the sweep runs ``runs`` replicated simulations with derived
seeds; one CSV row per cell carries the metric means plus per-run values.
Output is deterministic for a fixed base seed: rerunning an experiment
produces a byte-identical file.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, replace
from typing import IO, Sequence

from dtnsim.engine import (
    MetricsReport,
    SimConfig,
    run as run_simulation,
    summarize,
)
from dtnsim.mobility import Arena, WaypointParams, generate_trace, save_trace
from dtnsim.routing import Protocol

ENV_PREFIX = "DTNSIM_"

_TABLE_DEFAULTS: dict[str, str] = {
    "protocol": "epidemic,friendship,proposed1,proposed2",
    "nodes": "25,75",
    "speed": "0.5,1.0,1.25,1.5",
    "ttl": "60,120,180,240,300,360",
    "runs": "10",
    "seed": "1",
    "area_width": "1000",
    "area_height": "1500",
    "comm_range": "3",
    "window_size": "600",
    "threshold": "0.01",
    "message_count": "1000",
    "generation_span": "1000",
    "hello_period": "1",
    "missed_hello_limit": "3",
    "pause": "0",
    "out": "",
    "trace": "",
    "event_log": "",
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    base: SimConfig
    protocols: list[Protocol]
    node_counts: list[int]
    speeds: list[float]
    ttls: list[float]
    runs: int = 10
    out: str | None = None
    trace: str | None = None
    event_log: str | None = None

    def cells(self) -> list[tuple[Protocol, int, float, float]]:
        return [
            (proto, nodes, speed, ttl)
            for proto in self.protocols
            for nodes in self.node_counts
            for speed in self.speeds
            for ttl in self.ttls
        ]


def _parse_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            key = key.strip()
            if key not in _TABLE_DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value.strip()
    return values


def _env_overrides() -> dict[str, str]:
    values = {}
    for key in _TABLE_DEFAULTS:
        env_value = os.environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            values[key] = env_value
    return values


def _to_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {value!r}") from None


def _to_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {value!r}") from None


def _to_list(key: str, value: str, conv) -> list:
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"{key}: empty sweep list")
    return [conv(key, item) for item in items]


def parse_config(
    path: str | None = None, overrides: dict[str, str] | None = None
) -> ExperimentSpec:
    """Merge defaults, config file, environment, and flag overrides."""
    values = dict(_TABLE_DEFAULTS)
    if path is not None:
        values.update(_parse_file(path))
    values.update(_env_overrides())
    for key, value in (overrides or {}).items():
        if key not in _TABLE_DEFAULTS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = value

    try:
        protocols = [
            Protocol.parse(name)
            for name in _to_list("protocol", values["protocol"], lambda _k, v: v)
        ]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    spec = ExperimentSpec(
        base=SimConfig(
            arena_width=_to_float("area_width", values["area_width"]),
            arena_height=_to_float("area_height", values["area_height"]),
            comm_range=_to_float("comm_range", values["comm_range"]),
            window_size=_to_float("window_size", values["window_size"]),
            threshold=_to_float("threshold", values["threshold"]),
            message_count=_to_int("message_count", values["message_count"]),
            generation_span=_to_float("generation_span", values["generation_span"]),
            hello_period=_to_float("hello_period", values["hello_period"]),
            missed_hello_limit=_to_int(
                "missed_hello_limit", values["missed_hello_limit"]
            ),
            pause=_to_float("pause", values["pause"]),
            seed=_to_int("seed", values["seed"]),
        ),
        protocols=protocols,
        node_counts=_to_list("nodes", values["nodes"], _to_int),
        speeds=_to_list("speed", values["speed"], _to_float),
        ttls=_to_list("ttl", values["ttl"], _to_float),
        runs=_to_int("runs", values["runs"]),
        out=values["out"] or None,
        trace=values["trace"] or None,
        event_log=values["event_log"] or None,
    )
    if spec.runs < 1:
        raise ConfigError("runs: must be at least 1")
    probe = replace(
        spec.base,
        protocol=spec.protocols[0],
        node_count=spec.node_counts[0],
        speed=spec.speeds[0],
        ttl=spec.ttls[0],
    )
    try:
        probe.check()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return spec


# -- sweep execution -----------------------------------------------------------


def _fmt_cell(value: float | int) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _header(runs: int) -> str:
    cols = [
        "protocol",
        "nodes",
        "speed",
        "ttl",
        "runs",
        "status",
        "delivery_ratio",
        "delivery_cost",
        "delivery_efficiency",
    ]
    for k in range(1, runs + 1):
        cols += [f"run{k}_ratio", f"run{k}_cost", f"run{k}_efficiency"]
    return ",".join(cols)


def _event_log_path(spec: ExperimentSpec, cell_index: int, run_index: int) -> str | None:
    if spec.event_log is None:
        return None
    if len(spec.cells()) * spec.runs == 1:
        return spec.event_log
    return f"{spec.event_log}.c{cell_index}.r{run_index}"


def run_experiment(spec: ExperimentSpec, progress: IO[str] | None = None) -> int:
    """Run every sweep cell; returns a nonzero exit status if any cell failed."""
    progress = progress if progress is not None else sys.stderr
    cells = spec.cells()
    lines = [_header(spec.runs)]
    failures = 0
    for index, (proto, nodes, speed, ttl) in enumerate(cells):
        config = replace(
            spec.base,
            protocol=proto,
            node_count=nodes,
            speed=speed,
            ttl=ttl,
            trace_path=spec.trace,
        )
        prefix = [proto.value, str(nodes), _fmt_cell(speed), _fmt_cell(ttl), str(spec.runs)]
        try:
            reports: list[MetricsReport] = []
            for k in range(spec.runs):
                reports.append(
                    run_simulation(
                        replace(config, seed=config.seed + k),
                        event_log=_event_log_path(spec, index, k),
                    )
                )
            summary = summarize(reports)
        except Exception as exc:  # keep sweeping; mark the cell
            failures += 1
            row = prefix + [f"error:{type(exc).__name__}"] + [""] * (3 + 3 * spec.runs)
            lines.append(",".join(row))
            print(
                f"[{index + 1}/{len(cells)}] {' '.join(prefix[:4])} FAILED: {exc}",
                file=progress,
            )
            continue
        row = prefix + [
            "ok",
            repr(summary.delivery_ratio),
            repr(summary.delivery_cost),
            repr(summary.delivery_efficiency),
        ]
        for report in summary.runs:
            row += [
                repr(report.delivery_ratio),
                repr(report.delivery_cost),
                repr(report.delivery_efficiency),
            ]
        lines.append(",".join(row))
        print(
            f"[{index + 1}/{len(cells)}] {' '.join(prefix[:4])} "
            f"ratio={summary.delivery_ratio:.4f} cost={summary.delivery_cost:.4f} "
            f"efficiency={summary.delivery_efficiency:.4f}",
            file=progress,
        )
    text = "\n".join(lines) + "\n"
    if spec.out:
        with open(spec.out, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if failures else 0


def _dump_trace(spec: ExperimentSpec, path: str) -> None:
    base = spec.base
    duration = base.window_size + base.generation_span + max(spec.ttls) + 2 * base.tick
    trace = generate_trace(
        WaypointParams(
            arena=Arena(base.arena_width, base.arena_height),
            speed_min=spec.speeds[0],
            speed_max=spec.speeds[0],
            pause=base.pause,
            seed=base.seed,
        ),
        spec.node_counts[0],
        duration,
        base.tick,
    )
    save_trace(trace, path)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dtnsim",
        description=(
            "Sweep DTN routing experiments (protocol x nodes x speed x TTL) "
            "and write one CSV row of delivery metrics per cell."
        ),
    )
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--protocol", help="comma list: epidemic,friendship,proposed1,proposed2")
    parser.add_argument("--ttl", help="comma list of TTL seconds")
    parser.add_argument("--nodes", help="comma list of node counts")
    parser.add_argument("--speed", help="comma list of speeds (m/s)")
    parser.add_argument("--runs", help="replicated runs per cell")
    parser.add_argument("--seed", help="base seed")
    parser.add_argument("--trace", help="ingest a trace file instead of generating")
    parser.add_argument("--dump-trace", metavar="PATH", help="write the generated trace and exit")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument("--event-log", help="per-run message event log path")
    args = parser.parse_args(argv)

    overrides = {
        key: value
        for key, value in {
            "protocol": args.protocol,
            "ttl": args.ttl,
            "nodes": args.nodes,
            "speed": args.speed,
            "runs": args.runs,
            "seed": args.seed,
            "trace": args.trace,
            "out": args.out,
            "event_log": args.event_log,
        }.items()
        if value is not None
    }
    try:
        spec = parse_config(args.config, overrides)
        if args.dump_trace:
            _dump_trace(spec, args.dump_trace)
            return 0
        return run_experiment(spec)
    except (ConfigError, OSError) as exc:
        print(f"dtnsim: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
