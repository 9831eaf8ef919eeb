"""Command-line front end.

Every option lives under a dotted key (``model.d``, ``mc.seed``, ...) which can be
set in a flat ``key = value`` config file passed with ``--config``; flags given on
the command line override the file. Exit status: 0 success, 2 configuration or
usage error, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .edgeworth import DecorrelationParams
from .errors import DegenerateDataError, LmPeriodogramError
from .filtermodel import SIM_TRUNCATION, FarimaSpec, InnovationSpec
from .gph import check_bandwidth, estimate
from .harness import (
    EDGEWORTH_COLUMNS,
    LEMMA8_COLUMNS,
    MSE_SCAN_COLUMNS,
    TABLE1_COLUMNS,
    ExperimentConfig,
    edgeworth_fit_experiment,
    run_mse_experiment,
    verify_lemma8,
    write_rows,
)
from .simulate import SeedSpec, read_series_csv, simulate_gaussian_exact, simulate_truncated_ma, write_series_csv
from .spectral import tapered_dft_all

__all__ = ["main", "run_command", "parse_config_file", "ConfigError"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

log = logging.getLogger("lmperiodogram")


class ConfigError(ValueError):
    pass


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    text = str(text).strip()
    return tuple(float(v) for v in text.replace(",", " ").split()) if text else ()


def _ints(text) -> tuple[int, ...]:
    """Comma list with optional ``a:b`` inclusive ranges."""
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    out: list[int] = []
    for part in str(text).replace(",", " ").split():
        if ":" in part:
            a, b = part.split(":", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def _names(text) -> tuple[str, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(text)
    return tuple(v for v in str(text).replace(",", " ").split())


@dataclass(frozen=True)
class Option:
    key: str
    flag: str
    convert: Callable
    default: object
    help: str


OPTIONS = {
    o.key: o
    for o in [
        Option("model.d", "--d", float, 0.0, "memory parameter d"),
        Option("model.ar", "--ar", _floats, (), "AR coefficients, comma separated"),
        Option("model.ma", "--ma", _floats, (), "MA coefficients, comma separated"),
        Option("innovations.kind", "--innovations", _names, ("gaussian",), "innovation law(s): gaussian, laplace, pareto, exponential"),
        Option("mc.n", "--n", _ints, (250,), "sample size(s)"),
        Option("mc.replications", "--replications", int, 1000, "Monte Carlo replications"),
        Option("mc.seed", "--seed", int, None, "master seed"),
        Option("mc.truncation", "--truncation", int, SIM_TRUNCATION, "MA truncation length T"),
        Option("mc.threads", "--threads", int, 1, "worker threads (0 = auto)"),
        Option("simulate.method", "--method", str, "truncated", "simulator: truncated or exact (Gaussian only)"),
        Option("gph.taper_order", "--r", int, 1, "taper order r"),
        Option("gph.m", "--m", int, None, "bandwidth m (default: n ** 0.8 / (r + 1), capped to the valid range)"),
        Option("gph.grid", "--grid", _ints, None, "bandwidth grid, e.g. 8:41 (default: 8..n/6)"),
        Option("output.dir", "--out", str, ".", "output directory"),
        Option("input.series", "--input", str, None, "series CSV with header x (skips simulation)"),
        Option("lemma8.n_list", "--n-list", _ints, (256, 512, 1024), "sample sizes"),
        Option("lemma8.regime", "--regime", str, "local", "decorrelation regime: local or global"),
        Option("lemma8.beta", "--beta", float, 2.0, "smoothness exponent beta"),
        Option("edgeworth.n", "--edgeworth-n", int, 64, "sample size"),
        Option("edgeworth.replications", "--edgeworth-replications", int, 10**6, "replications"),
        Option("edgeworth.order", "--order", int, 4, "expansion order s"),
        Option("edgeworth.k", "--k", int, None, "frequency index (default: n_tilde // 4)"),
    ]
}

COMMON = ["output.dir"]
COMMANDS: dict[str, tuple[str, list[str]]] = {
    "simulate": (
        "simulate one FARIMA series and write series.csv",
        ["model.d", "model.ar", "model.ma", "innovations.kind", "mc.n", "mc.seed", "mc.truncation", "simulate.method"],
    ),
    "periodogram": (
        "tapered periodogram of a series, written to periodogram.csv",
        ["input.series", "model.d", "model.ar", "model.ma", "innovations.kind", "mc.n", "mc.seed", "mc.truncation", "gph.taper_order"],
    ),
    "gph": (
        "log-periodogram estimate of d, written to gph.csv",
        ["input.series", "model.d", "model.ar", "model.ma", "innovations.kind", "mc.n", "mc.seed", "mc.truncation", "gph.taper_order", "gph.m"],
    ),
    "mse-scan": (
        "Monte Carlo bias and MSE over a bandwidth grid, written to mse_scan.csv",
        ["model.d", "model.ar", "model.ma", "innovations.kind", "mc.n", "mc.replications", "mc.seed", "mc.truncation", "mc.threads", "gph.taper_order", "gph.grid"],
    ),
    "table1": (
        "optimal bandwidth, bias and MSE per (n, innovation law), written to table1.csv",
        ["model.d", "model.ar", "model.ma", "innovations.kind", "mc.n", "mc.replications", "mc.seed", "mc.truncation", "mc.threads", "gph.taper_order", "gph.grid"],
    ),
    "verify-lemma8": (
        "exact DFT decorrelation deviations against the bound, written to lemma8.csv",
        ["model.d", "model.ar", "model.ma", "gph.taper_order", "lemma8.n_list", "lemma8.regime", "lemma8.beta"],
    ),
    "edgeworth-check": (
        "histogram L1 distances to the Gaussian and Edgeworth densities, written to edgeworth.csv",
        ["innovations.kind", "mc.seed", "edgeworth.n", "edgeworth.replications", "edgeworth.order", "edgeworth.k"],
    ),
}
SEED_REQUIRED = {"mse-scan", "table1"}


def parse_config_file(path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
    out: dict[str, str] = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in OPTIONS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        out[key] = value
    return out


def _fmt_default(v) -> str:
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v) or "none"
    return "none" if v is None else str(v)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmperiodogram", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)
    for name, (desc, keys) in COMMANDS.items():
        p = sub.add_parser(name, help=desc, description=desc)
        p.add_argument("--config", default=None, help="flat key = value config file (default: none)")
        for key in keys + COMMON:
            o = OPTIONS[key]
            extra = " [required]" if key == "mc.seed" and name in SEED_REQUIRED else ""
            default = 0 if key == "mc.seed" and name not in SEED_REQUIRED else o.default
            p.add_argument(o.flag, dest=key, default=None, metavar=key.split(".")[-1].upper(),
                           help=f"{o.help} [{key}] (default: {_fmt_default(default)}){extra}")
    return parser


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags, then convert every value."""
    keys = COMMANDS[command][1] + COMMON
    raw: dict[str, object] = {}
    if ns.config:
        from_file = parse_config_file(ns.config)
        stray = [k for k in from_file if k not in keys]
        if stray:
            raise ConfigError(f"keys not used by {command}: {', '.join(stray)}")
        raw.update(from_file)
    for key in keys:
        val = getattr(ns, key, None)
        if val is not None:
            raw[key] = val
    cfg = {}
    for key in keys:
        o = OPTIONS[key]
        if key in raw:
            try:
                cfg[key] = o.convert(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw[key]!r}") from exc
        else:
            cfg[key] = o.default
    if "mc.seed" in cfg and cfg["mc.seed"] is None:
        if command in SEED_REQUIRED:
            raise ConfigError(f"{command} requires a seed (--seed or mc.seed)")
        cfg["mc.seed"] = 0
    return cfg


def _model(cfg) -> FarimaSpec:
    return FarimaSpec(cfg["model.d"], cfg["model.ar"], cfg["model.ma"])


def _single(cfg, key):
    vals = cfg[key]
    if len(vals) != 1:
        raise ConfigError(f"{key} takes a single value for this command")
    return vals[0]


def _innovation(cfg) -> InnovationSpec:
    return InnovationSpec.parse(_single(cfg, "innovations.kind"))


def _outdir(cfg) -> str:
    path = cfg["output.dir"]
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable")
    return path


def _series(cfg) -> np.ndarray:
    if cfg.get("input.series"):
        return np.asarray(read_series_csv(cfg["input.series"]))
    n = _single(cfg, "mc.n")
    spec, innov = _model(cfg), _innovation(cfg)
    if cfg.get("simulate.method", "truncated") == "exact":
        if innov.kind.value != "gaussian":
            raise ConfigError("the exact simulator needs Gaussian innovations")
        return np.asarray(simulate_gaussian_exact(spec, n, SeedSpec(cfg["mc.seed"], 0)))
    if cfg.get("simulate.method", "truncated") != "truncated":
        raise ConfigError("simulate.method must be truncated or exact")
    return np.asarray(simulate_truncated_ma(spec, innov, n, cfg["mc.truncation"], SeedSpec(cfg["mc.seed"], 0)))


def _default_m(n: int, r: int) -> int:
    from .spectral import n_tilde

    cap = (n_tilde(n, r) - 1) // (r + 1) - 1
    return max(2, min(cap, int(n**0.8) // (r + 1)))


def cmd_simulate(cfg) -> str:
    out = _outdir(cfg)
    x = _series(cfg)
    path = os.path.join(out, "series.csv")
    write_series_csv(path, x)
    return f"simulate: n={x.size} mean={x.mean():.6g} var={x.var():.6g} -> {path}"


def cmd_periodogram(cfg) -> str:
    out = _outdir(cfg)
    dft = tapered_dft_all(_series(cfg), cfg["gph.taper_order"])
    path = os.path.join(out, "periodogram.csv")
    dft.to_csv(path)
    return f"periodogram: n={dft.n} r={dft.order} ordinates={dft.k.size} -> {path}"


def cmd_gph(cfg) -> str:
    r = cfg["gph.taper_order"]
    m = cfg["gph.m"]
    if not cfg.get("input.series") and m is not None:
        # reject an impossible bandwidth before simulating anything
        check_bandwidth(_single(cfg, "mc.n"), m, r)
    out = _outdir(cfg)
    x = _series(cfg)
    if m is None:
        m = _default_m(x.size, r)
    fit = estimate(x, m, r)
    path = os.path.join(out, "gph.csv")
    write_rows(path, [fit.csv_row()], ["n", "m", "r", "d_hat"])
    return f"gph: n={fit.n} m={fit.m} r={fit.taper_order} d_hat={fit.d_hat:.6f} -> {path}"


def _experiments(cfg, kinds):
    spec = _model(cfg)
    r = cfg["gph.taper_order"]
    for n in cfg["mc.n"]:
        for kind in kinds:
            ec = ExperimentConfig(
                model=spec,
                innovations=InnovationSpec.parse(kind),
                n=n,
                replications=cfg["mc.replications"],
                bandwidth_grid=cfg["gph.grid"],
                taper_order=r,
                master_seed=cfg["mc.seed"],
                truncation=cfg["mc.truncation"],
            )
            res = run_mse_experiment(ec, threads=cfg["mc.threads"])
            if res.excluded:
                log.warning("n=%d %s: %d replications excluded", n, kind, res.excluded)
            yield res


def _check_grid(cfg):
    if cfg["gph.grid"] is not None:
        for n in cfg["mc.n"]:
            for m in cfg["gph.grid"]:
                check_bandwidth(n, m, cfg["gph.taper_order"])


def cmd_mse_scan(cfg) -> str:
    _check_grid(cfg)
    out = _outdir(cfg)
    rows = []
    for res in _experiments(cfg, cfg["innovations.kind"]):
        rows.extend(res.scan_rows())
    path = os.path.join(out, "mse_scan.csv")
    write_rows(path, rows, MSE_SCAN_COLUMNS)
    return f"mse-scan: {len(rows)} rows -> {path}"


def cmd_table1(cfg) -> str:
    _check_grid(cfg)
    out = _outdir(cfg)
    rows = [res.table1_row() for res in _experiments(cfg, cfg["innovations.kind"])]
    path = os.path.join(out, "table1.csv")
    write_rows(path, rows, TABLE1_COLUMNS)
    desc = "; ".join(f"n={r['n']} {r['innovation']} m_opt={r['m_opt']} mse={r['mse_at_opt']:.5f}" for r in rows)
    return f"table1: {desc} -> {path}"


def cmd_lemma8(cfg) -> str:
    out = _outdir(cfg)
    params = DecorrelationParams(cfg["lemma8.regime"], cfg["lemma8.beta"])
    rep = verify_lemma8(_model(cfg), cfg["gph.taper_order"], cfg["lemma8.n_list"], params=params)
    path = os.path.join(out, "lemma8.csv")
    write_rows(path, rep.rows, LEMMA8_COLUMNS)
    fitted = " ".join(f"{n}:{c:.4g}" for n, c in rep.fitted_C.items())
    return f"verify-lemma8: fitted C {fitted} (spread {rep.stability():.3f}) -> {path}"


def cmd_edgeworth(cfg) -> str:
    out = _outdir(cfg)
    rep = edgeworth_fit_experiment(
        _innovation(cfg),
        cfg["edgeworth.n"],
        cfg["edgeworth.replications"],
        k=cfg["edgeworth.k"],
        s=cfg["edgeworth.order"],
        seed=cfg["mc.seed"],
    )
    path = os.path.join(out, "edgeworth.csv")
    write_rows(path, [rep.row()], EDGEWORTH_COLUMNS)
    return f"edgeworth-check: n={rep.n} k={rep.k} L1 gauss={rep.l1_gauss:.5f} edgeworth={rep.l1_edgeworth:.5f} -> {path}"


HANDLERS = {
    "simulate": cmd_simulate,
    "periodogram": cmd_periodogram,
    "gph": cmd_gph,
    "mse-scan": cmd_mse_scan,
    "table1": cmd_table1,
    "verify-lemma8": cmd_lemma8,
    "edgeworth-check": cmd_edgeworth,
}


def run_command(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(ns.command, ns)
        summary = HANDLERS[ns.command](cfg)
    except DegenerateDataError as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigError, LmPeriodogramError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(summary)
    return EXIT_OK


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    sys.exit(run_command())


if __name__ == "__main__":
    main()
