"""Command-line interface: ``cifabc estimate | test | simulate``."""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import itertools
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import MultiplierSpec, run_test
from .core import DataError, Observation, StepFunction, TwoSampleData
from .estimators import aalen_johansen
from .kernels import BACKEND
from .simulation import (
    CENSORING_SETUPS,
    CensoringLaw,
    CensoringSpec,
    ConfigError,
    RejectionTable,
    ScenarioConfig,
    SimulationError,
    TestSpec,
    monte_carlo_rejection_rates,
)
from .statistics import Window, WindowError

OUTPUT_ENV = "CIFABC_OUTPUT_DIR"
RESULTS_LOG = "results.jsonl"


class UsageError(Exception):
    pass


# -- dataset files -------------------------------------------------------------------


def read_dataset(path) -> TwoSampleData:
    """Parse a ``time,status,group[,entry]`` CSV file (columns matched by name)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or not any(h.strip() for h in header):
            raise DataError(f"{path}: line 1: empty file or missing header")
        cols = {h.strip().lower(): i for i, h in enumerate(header)}
        missing = [c for c in ("time", "status", "group") if c not in cols]
        if missing:
            raise DataError(f"{path}: line 1: missing column(s) {', '.join(missing)}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            try:
                entry = float(row[cols["entry"]]) if "entry" in cols and row[cols["entry"]].strip() else 0.0
                status = _int_code(row[cols["status"]], "status")
                group = _int_code(row[cols["group"]], "group")
                records.append(Observation(entry, float(row[cols["time"]]), status, group))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from None
    if not records:
        raise DataError(f"{path}: line 2: no data rows")
    return TwoSampleData.from_arrays(
        [r.exit for r in records], [r.status for r in records], [r.group for r in records],
        entry=[r.entry for r in records],
    )


def _int_code(text: str, name: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"{name} must be an integer code, got {text!r}")
    return int(value)


def write_estimate(rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["group", "cause", "time", "value"])
    for group, cause, f in rows:
        writer.writerow([group, cause, repr(0.0), repr(f.initial_value)])
        for t, v in zip(f.jump_times, f.values_after):
            writer.writerow([group, cause, repr(float(t)), repr(float(v))])


def read_estimate(path) -> dict:
    """Step functions keyed by ``(group, cause)`` from a ``cifabc estimate`` table."""
    points = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (int(row["group"]), int(row["cause"]))
            points.setdefault(key, []).append((float(row["time"]), float(row["value"])))
    out = {}
    for key, pts in points.items():
        (_, initial), rest = pts[0], pts[1:]
        out[key] = StepFunction([t for t, _ in rest], [v for _, v in rest], initial)
    return out


def jitter_times(data: TwoSampleData, eps: float, seed: int) -> TwoSampleData:
    """Add independent uniform(-eps/2, eps/2) noise to every exit time."""
    rng = np.random.default_rng([seed, 0x6A17])
    exits, statuses, groups, entries = [], [], [], []
    for label in (1, 2):
        g = data.group(label)
        noise = rng.uniform(-eps / 2.0, eps / 2.0, g.size)
        exits.append(np.maximum(g.exit + noise, np.nextafter(g.entry, np.inf)))
        statuses.append(g.status)
        groups.append(np.full(g.size, label))
        entries.append(g.entry)
    return TwoSampleData.from_arrays(
        np.concatenate(exits), np.concatenate(statuses), np.concatenate(groups), np.concatenate(entries)
    )


def default_window(data: TwoSampleData) -> Window:
    """[0, last time at which both groups still have subjects at risk]."""
    return Window(0.0, float(min(data.group1.exit.max(), data.group2.exit.max())))


def output_dir(explicit=None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_ENV, "cifabc_out"))


def append_record(path: Path, record: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    line = json.dumps(record, sort_keys=True) + "\n"
    # a single write on an O_APPEND descriptor keeps concurrent records whole
    fd = os.open(path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
    try:
        os.write(fd, line.encode())
    finally:
        os.close(fd)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- commands ----------------------------------------------------------------------


def cmd_estimate(args) -> int:
    data = read_dataset(args.dataset)
    groups = (args.group,) if args.group else (1, 2)
    rows = [(g, args.cause, aalen_johansen(data, g, args.cause).estimate) for g in groups]
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="") as fh:
            write_estimate(rows, fh)
    else:
        write_estimate(rows, sys.stdout)
    if args.plot:
        from .plotting import plot_cifs

        plot_cifs({g: f for g, _, f in rows}, args.cause, args.plot)
    return 0


def cmd_test(args) -> int:
    data = read_dataset(args.dataset)
    jitter = 0.0
    if args.jitter is not None:
        jitter = 1e-6 * max(data.group1.exit.max(), data.group2.exit.max()) if args.jitter == "auto" else float(args.jitter)
        if jitter < 0:
            raise UsageError("--jitter must be nonnegative")
        if jitter > 0:
            data = jitter_times(data, jitter, args.seed)
    window = Window.parse(args.window) if args.window else default_window(data)
    if not args.window:
        print(f"window not given; using {window}", file=sys.stderr)
    spec = MultiplierSpec(args.multiplier, args.corrected)
    result = run_test(data, window, args.kind, spec, B=args.B, alpha=args.alpha, seed=args.seed, adjusted=args.adjusted)

    record = {
        "record": "test",
        "version": __version__,
        "backend": BACKEND,
        "dataset": str(args.dataset),
        "dataset_sha256": _sha256(args.dataset),
        "config": {
            "kind": args.kind,
            "window": [window.t1, window.t2],
            "multiplier": spec.family,
            "corrected": spec.corrected,
            "adjusted": args.adjusted,
            "B": args.B,
            "alpha": args.alpha,
            "seed": args.seed,
            "jitter": jitter,
        },
        "sizes": list(data.sizes),
        "n_ties": len(data.ties),
        "result": result.to_dict(),
    }
    log = Path(args.out) if args.out else output_dir() / RESULTS_LOG
    append_record(log, record)

    s = result.statistic
    print(f"test          {args.kind} ({'adjusted ' if args.adjusted else ''}wild bootstrap, {spec.label} multipliers)")
    print(f"window        {window}")
    print(f"group sizes   {data.sizes[0]}, {data.sizes[1]}   tied event times: {len(data.ties)}")
    if result.raw.value != s.value:
        print(f"raw statistic {result.raw.value:.6g}")
    print(f"statistic     {s.value:.6g}")
    print(f"critical      {result.critical_value:.6g}  (alpha = {args.alpha:g}, B = {args.B}, seed = {args.seed})")
    print(f"p-value       {result.p_value:.6g}")
    print(f"reject H0     {'yes' if result.reject else 'no'}")
    print(f"record        {log}")
    return 0


# -- simulation config ---------------------------------------------------------------

_SECTIONS = {
    "scenario": {"model", "hypothesis", "sizes", "window", "c", "beta1", "beta2", "a1", "a2", "p"},
    "censoring": {"setups", "group1", "group2"},
    "tests": {"roster"},
    "mc": {"n_sim", "b", "alpha", "seed", "workers"},
}


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.replace("\n", ",").split(",") if v.strip()]


def _field(section, key, conv, text):
    try:
        return conv(text)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {text!r} ({exc})") from None


def _pair(text: str) -> tuple[float, float]:
    a, b = text.split(":")
    return float(a), float(b)


def load_config(path) -> tuple[list[ScenarioConfig], int]:
    """Expand a simulation config file into scenario cells; also returns ``workers``."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        if not parser.read(path):
            raise ConfigError(f"{path}: cannot read config file")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]; expected {sorted(_SECTIONS)}")
        for key in parser[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"[{section}] unknown key {key!r}; valid keys: {sorted(_SECTIONS[section])}")
    if "scenario" not in parser:
        raise ConfigError("missing section [scenario]")

    sc = parser["scenario"]
    base = {
        "model": _field("scenario", "model", int, sc.get("model", "2")),
        "hypothesis": sc.get("hypothesis", "H0").strip(),
    }
    for key in ("c", "beta1", "beta2", "a1", "a2", "p"):
        if key in sc:
            base[key] = _field("scenario", key, float, sc[key])
    if "window" in sc:
        base["window"] = _field("scenario", "window", Window.parse, sc["window"].strip())
    sizes = [_field("scenario", "sizes", _pair, s) for s in _split(sc.get("sizes", "50:50"))]

    cens = parser["censoring"] if "censoring" in parser else {}
    setups_text = cens.get("setups", "none").strip()
    if setups_text == "all":
        setups = list(CENSORING_SETUPS)
    else:
        setups = [(0.0, 0.0) if s == "none" else _field("censoring", "setups", _pair, s) for s in _split(setups_text)]
    law1 = cens.get("group1", "exponential").strip()
    law2 = cens.get("group2", "uniform").strip()
    for key, law in (("group1", law1), ("group2", law2)):
        if law not in ("exponential", "uniform"):
            raise ConfigError(f"[censoring] {key}: unknown law {law!r}; expected exponential or uniform")

    roster = _split(parser["tests"].get("roster", "abc-cPo")) if "tests" in parser else ["abc-cPo"]
    for name in roster:
        TestSpec.parse(name)
    mc = parser["mc"] if "mc" in parser else {}
    base.update(
        n_sim=_field("mc", "n_sim", int, mc.get("n_sim", "1000")),
        B=_field("mc", "B", int, mc.get("b", "500")),
        alpha=_field("mc", "alpha", float, mc.get("alpha", "0.05")),
        seed=_field("mc", "seed", int, mc.get("seed", "0")),
        roster=tuple(roster),
    )
    workers = _field("mc", "workers", int, mc.get("workers", "1"))

    cells = []
    for (n1, n2), (p1, p2) in itertools.product(sizes, setups):
        spec = CensoringSpec(
            CensoringLaw(law1, p1) if p1 > 0 else CensoringLaw(),
            CensoringLaw(law2, p2) if p2 > 0 else CensoringLaw(),
        )
        cells.append(ScenarioConfig(n1=int(n1), n2=int(n2), censoring=spec, **base))
    return cells, workers


def cmd_simulate(args) -> int:
    cells, workers = load_config(args.config)
    if args.workers is not None:
        workers = args.workers
    out = output_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tables = []
    for k, cell in enumerate(cells, start=1):
        path = out / f"{cell.label}.json"
        if path.exists() and not args.force:
            table = RejectionTable.from_dict(json.loads(path.read_text()))
            if table.config != cell:
                raise ConfigError(f"{path} was produced by a different configuration; use --force to overwrite")
            print(f"[{k}/{len(cells)}] {cell.label}: present, skipped", file=sys.stderr)
            tables.append(table)
            continue
        step = max(1, cell.n_sim // 10)

        def progress(done, k=k, cell=cell):
            if done % step == 0 or done == cell.n_sim:
                print(f"[{k}/{len(cells)}] {cell.label}: {done}/{cell.n_sim}", file=sys.stderr)

        table = monte_carlo_rejection_rates(cell, workers=workers, progress=progress)
        payload = json.dumps(table.to_dict(), sort_keys=True, indent=1) + "\n"
        path.write_text(payload)
        append_record(out / RESULTS_LOG, {"record": "simulate", "version": __version__, "backend": BACKEND,
                                          "table": table.to_dict()})
        tables.append(table)

    summary = out / "summary.csv"
    with summary.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "hypothesis", "n1", "n2", "censoring", "test", "rejections", "n_sim", "rate", "se"])
        for t in tables:
            c = t.config
            for row in t.rows:
                writer.writerow([c.model, c.hypothesis, c.n1, c.n2, c.censoring.label, row.test,
                                 row.rejections, row.n_sim, repr(row.rate), repr(row.se)])
    for t in tables:
        for row in t.rows:
            print(f"{t.config.label:40s} {row.test:12s} {row.rate:.3f} (se {row.se:.3f})")
    if args.plot:
        from .plotting import plot_rejection_rates

        plot_rejection_rates(tables, out / "summary.svg")
    return 0


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cifabc", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernel)")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="Aalen-Johansen cumulative incidence per group")
    e.add_argument("dataset")
    e.add_argument("--group", type=int, choices=(1, 2))
    e.add_argument("--cause", type=int, choices=(1, 2), default=1)
    e.add_argument("--out", help="output CSV (default: stdout)")
    e.add_argument("--plot", help="write an SVG of the curves")
    e.set_defaults(func=cmd_estimate)

    t = sub.add_parser("test", help="two-sample test of equal cause-1 incidence")
    t.add_argument("dataset")
    t.add_argument("--window", help="t1:t2 (default: [0, last time both groups are at risk])")
    t.add_argument("--kind", choices=("abc", "ks", "cvm", "pepe", "zabc"), default="abc")
    t.add_argument("--multiplier", choices=("normal", "poisson", "rademacher"), default="poisson")
    t.add_argument("--corrected", action="store_true", help="inflate multipliers by 1 + (n1+n2)/(n1 n2)")
    t.add_argument("--adjusted", action="store_true", help="use the tie-adjusted bootstrap process")
    t.add_argument("--B", type=int, default=1000)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--jitter", nargs="?", const="auto", default=None,
                   help="break ties with uniform noise of this width (bare flag: 1e-6 * max time)")
    t.add_argument("--out", help=f"results log (default: ${OUTPUT_ENV}/{RESULTS_LOG})")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="Monte Carlo rejection rates from a config file")
    s.add_argument("config")
    s.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV})")
    s.add_argument("--force", action="store_true", help="recompute cells already present")
    s.add_argument("--workers", type=int)
    s.add_argument("--plot", action="store_true", help="write summary.svg")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        warnings.showwarning = _show_warning
        try:
            return args.func(args)
        except UsageError as exc:
            parser.error(str(exc))
        except (DataError, WindowError, ConfigError, SimulationError, ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
