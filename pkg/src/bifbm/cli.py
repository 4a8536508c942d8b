"""Command-line experiment runner.

Exit status: 0 all checks pass, 1 a check failed, 2 invalid
configuration, 3 compute error. Options can come from a JSON document
(``--config``); flags given on the command line override its fields and
the merged configuration is echoed into every report.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import chaos, checks, pathio
from .covariance import BifBmParams, TimeGrid
from .errors import BifbmError, ConfigError
from .estimators import (
    expected_local_time,
    graph_dimension_reference,
    graph_image_dimension,
    image_dimension_reference,
    level_set_dimension,
    level_set_dimension_reference,
    mean_se,
    occupation_local_time,
)
from .report import ExperimentReport, emit, emit_timing
from .sampler import METHODS, sample_paths
from .spectral import spectral_density, tail_mass
from .estimators._common import fit_scaling

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3

COMMANDS = ("simulate", "spectrum", "verify", "localtime", "dimension", "chaos", "report-all")

# per-command defaults; also the set of accepted config keys
DEFAULTS = {
    "simulate": dict(h=0.5, k=1.0, d=1, t_max=1.0, grid_n=1024, grid="auto", t_min_frac=2.0**-12,
                     paths=1, method="cholesky", seed=checks.DEFAULT_SEED, out="bifbm-out",
                     format="csv", n_modes=4096, lambda_max=1000.0),
    "spectrum": dict(h=0.5, k=1.0, lambda_max=1e4, n_lambda=41, tol=1e-12, out="bifbm-out"),
    "verify": dict(lattice="default", seed=checks.DEFAULT_SEED, out="bifbm-out"),
    "localtime": dict(h=0.5, k=0.8, d=1, grid_n=2**14, t_min_frac=2.0**-12, bandwidth=None,
                      bins=41, paths=100, seed=checks.DEFAULT_SEED, out="bifbm-out"),
    "dimension": dict(target="level", h=0.5, k=0.8, d=1, grid_n=2**16, t_min_frac=2.0**-12,
                      paths=10, level=0.0, seed=checks.DEFAULT_SEED, out="bifbm-out"),
    "chaos": dict(h=0.5, k=0.8, d=1, x=0.0, t=1.0, order_cap=40, quad_n=16, grade=40, alpha=0.0,
                  out="bifbm-out"),
    "report-all": dict(seed=checks.DEFAULT_SEED, out_dir="report", only=None),
}


@dataclass
class ExperimentConfig:
    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None

    def echo(self) -> dict:
        # output locations are not part of the experiment
        skip = ("out", "out_dir")
        return {"command": self.command, **{k: v for k, v in self.options.items() if k not in skip}}

    def params(self) -> BifBmParams:
        return BifBmParams(self.h, self.k, self.options.get("d", 1))

    def validate(self) -> "ExperimentConfig":
        o = self.options
        if "h" in o and not 0 < o["h"] < 1:
            raise ConfigError(f"h: must lie in (0, 1), got {o['h']!r}")
        if "k" in o and not 0 < o["k"] <= 1:
            raise ConfigError(f"k: must lie in (0, 1], got {o['k']!r}")
        for key in ("d", "paths", "n_modes", "bins", "quad_n", "n_lambda"):
            if key in o and (not isinstance(o[key], int) or o[key] < 1):
                raise ConfigError(f"{key}: must be a positive integer, got {o[key]!r}")
        if "grid_n" in o and (not isinstance(o["grid_n"], int) or o["grid_n"] < 1):
            raise ConfigError("grid_n: grid must be nonempty")
        for key in ("t_max", "t", "lambda_max", "tol", "t_min_frac"):
            if key in o and not (isinstance(o[key], (int, float)) and o[key] > 0):
                raise ConfigError(f"{key}: must be positive, got {o[key]!r}")
        if "t_min_frac" in o and not o["t_min_frac"] < 1:
            raise ConfigError("t_min_frac: must be below 1")
        if o.get("bandwidth") is not None and not o["bandwidth"] > 0:
            raise ConfigError("bandwidth: must be positive")
        if "seed" in o and (not isinstance(o["seed"], int) or not 0 <= o["seed"] < 2**64):
            raise ConfigError(f"seed: must be an integer in [0, 2^64), got {o['seed']!r}")
        if "method" in o and o["method"] not in METHODS:
            raise ConfigError(f"method: must be one of {', '.join(METHODS)}")
        if "grid" in o and o["grid"] not in ("auto", "uniform", "log"):
            raise ConfigError("grid: must be auto, uniform or log")
        if "format" in o and o["format"] not in ("csv", "binary", "both"):
            raise ConfigError("format: must be csv, binary or both")
        if "target" in o and o["target"] not in ("level", "graph", "image"):
            raise ConfigError("target: must be level, graph or image")
        if "order_cap" in o and (not isinstance(o["order_cap"], int) or o["order_cap"] < 0):
            raise ConfigError("order_cap: must be a nonnegative integer")
        if "alpha" in o and o["alpha"] < 0:
            raise ConfigError("alpha: must be nonnegative")
        if self.command in ("simulate", "localtime", "dimension", "chaos", "spectrum"):
            try:
                self.params()
            except BifbmError as exc:
                raise ConfigError(f"parameters: {exc}") from exc
        return self


def merge_config(command: str, file_doc: dict, flags: dict) -> ExperimentConfig:
    """Defaults < config file < explicit flags."""
    allowed = DEFAULTS[command]
    unknown = sorted(set(file_doc) - set(allowed) - {"command"})
    if unknown:
        raise ConfigError(f"unknown config field(s) for {command}: {', '.join(unknown)}")
    if file_doc.get("command", command) != command:
        raise ConfigError(f"config file is for {file_doc['command']!r}, not {command!r}")
    opts = dict(allowed)
    opts.update({k: v for k, v in file_doc.items() if k != "command"})
    opts.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig(command, opts).validate()


# ------------------------------------------------------------ commands

def _grid(cfg, kind=None) -> TimeGrid:
    kind = kind or cfg.options.get("grid", "log")
    t_max = cfg.options.get("t_max", 1.0)
    if kind == "uniform":
        return TimeGrid.uniform(t_max, cfg.grid_n, include_zero=True)
    return TimeGrid.log_uniform(t_max * cfg.t_min_frac, t_max, cfg.grid_n, include_zero=True)


def run_simulate(cfg, out: Path) -> ExperimentReport:
    p = cfg.params()
    kind = cfg.grid
    if kind == "auto":
        kind = "uniform" if cfg.method == "cholesky" else "log"
    if cfg.method == "lamperti" and kind != "log":
        raise ConfigError("grid: the Lamperti sampler needs grid=log")
    grid = _grid(cfg, kind)
    kw = {}
    if cfg.method == "spectral":
        kw = {"n_modes": cfg.n_modes, "lambda_max": cfg.lambda_max}
    paths = sample_paths(cfg.method, grid, p, cfg.paths, cfg.seed, **kw)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = []
    for path in paths:
        stem = f"path_{path.path_index:05d}"
        if cfg.format in ("csv", "both"):
            artifacts.append(pathio.write_csv(path, out / f"{stem}.csv").name)
        if cfg.format in ("binary", "both"):
            artifacts.append(pathio.write_binary(path, out / f"{stem}.bin").name)
    end = np.array([pth.values[-1] for pth in paths])
    var = float(np.mean(end**2))
    info = {k: v for k, v in paths[0].info.items() if isinstance(v, (int, float, str))}
    recs = [checks.record(
        "terminal_variance", "R(t,t)=t^{2HK}", var, grid.points[-1] ** (2 * p.hk), "none", None,
        details={"n_paths": cfg.paths, "n_grid": len(grid), "sampler_info": info},
        report_only=True,
    )]
    return ExperimentReport("simulate", cfg.echo(), recs, artifacts)


def run_spectrum(cfg, out: Path) -> ExperimentReport:
    p = cfg.params()
    lams = np.geomspace(cfg.lambda_max / 100, cfg.lambda_max, cfg.n_lambda)
    f = np.array([spectral_density(x, p, tol=cfg.tol) for x in lams])
    out.mkdir(parents=True, exist_ok=True)
    table = out / "spectrum.csv"
    with open(table, "w") as fh:
        fh.write("lambda,density\n")
        for a, b in zip(lams, f):
            fh.write(f"{a!r},{b!r}\n")
    fit = fit_scaling(np.log(lams), np.log(f))
    recs = [
        checks.record("spectral_slope", "f(lambda) ~ c lambda^{-(1+2HK)}", fit.slope, -(1 + 2 * p.hk),
                      "none", None, details={"r_squared": fit.r_squared, "operation": "spectral_density"},
                      report_only=True),
        checks.record("tail_mass", "int_{|lambda|>u} f <= c u^{-2HK}", tail_mass(cfg.lambda_max, p),
                      None, "none", None, details={"u": cfg.lambda_max, "operation": "tail_mass"},
                      report_only=True),
    ]
    return ExperimentReport("spectrum", cfg.echo(), recs, [table.name])


def _load_lattice(spec):
    if spec == "default":
        return checks.DEFAULT_LATTICE
    try:
        doc = json.loads(Path(spec).read_text())
    except OSError as exc:
        raise ConfigError(f"lattice: cannot read {spec}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"lattice: {spec} is not JSON: {exc}") from exc
    pts = doc.get("lattice", doc) if isinstance(doc, dict) else doc
    try:
        lat = tuple((float(h), float(k)) for h, k in pts)
        for h, k in lat:
            BifBmParams(h, k)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"lattice: expected a list of [h, k] pairs in range ({exc})") from exc
    if not lat:
        raise ConfigError("lattice: empty")
    return lat


def run_verify(cfg, out: Path) -> ExperimentReport:
    lattice = _load_lattice(cfg.lattice)
    recs = checks.verify_lattice(lattice, cfg.seed)
    echo = dict(cfg.echo(), lattice=[list(x) for x in lattice])
    return ExperimentReport("verify", echo, recs, [])


def run_localtime(cfg, out: Path) -> ExperimentReport:
    p = cfg.params()
    grid = _grid(cfg, "log")
    paths = sample_paths("lamperti", grid, p, cfg.paths, cfg.seed)
    bw = cfg.bandwidth if cfg.bandwidth is not None else float(cfg.grid_n) ** (-p.hk)
    centers = (np.arange(cfg.bins) - cfg.bins // 2) * bw
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ests = [occupation_local_time(pth, (0.0, 1.0), bw) for pth in paths]
    if p.d == 1:
        vals = np.array([[e.at(x) for x in centers] for e in ests])
    else:
        zero = np.zeros(p.d)
        vals = np.array([[e.at(zero + np.eye(p.d)[0] * x) for x in centers] for e in ests])
    mass_err = max(abs(e.mass() - 1.0) for e in ests)
    out.mkdir(parents=True, exist_ok=True)
    table = out / "localtime.csv"
    with open(table, "w") as fh:
        fh.write("x,mean,stderr\n")
        for j, x in enumerate(centers):
            m, se = mean_se(vals[:, j])
            fh.write(f"{float(x)!r},{m!r},{se!r}\n")
    m0, se0 = mean_se(vals[:, cfg.bins // 2])
    recs = [checks.record("occupation_mass", "mu_I(R^d) = |I|", mass_err, 0.0, "max", 1e-9,
                          details={"operation": "occupation_local_time"})]
    if p.d * p.hk < 1:
        recs.append(checks.record(
            "local_time_mean_at_0", "E L(0,[0,1]) = int_0^1 p_{u^{2HK}}(0) du", m0,
            expected_local_time(p), "none", None,
            details={"stderr": se0, "bandwidth": bw, "n_paths": cfg.paths}, report_only=True,
        ))
    return ExperimentReport("localtime", cfg.echo(), recs, [table.name])


def run_dimension(cfg, out: Path) -> ExperimentReport:
    p = cfg.params()
    grid = _grid(cfg, "log")
    paths = sample_paths("lamperti", grid, p, cfg.paths, cfg.seed)
    if cfg.target == "level":
        slopes = [level_set_dimension(pth, cfg.level).slope for pth in paths]
        ref = level_set_dimension_reference(p.hk, p.d)
        anchor = "dim Z_x = 1-HKd"
    elif cfg.target == "graph":
        slopes = [graph_image_dimension(pth, "graph").slope for pth in paths]
        ref = graph_dimension_reference([p.hk], p.d)
        anchor = "dimension of the graph"
    else:
        slopes = [graph_image_dimension(pth, "image").slope for pth in paths]
        ref = image_dimension_reference([p.hk], p.d)
        anchor = "dim B([0,1]) = min(d, 1/(HK))"
    m, se = mean_se(slopes)
    recs = [checks.record(f"{cfg.target}_dimension", anchor, m, ref, "none", None,
                          details={"stderr": se, "slopes": slopes, "n_grid": len(grid)},
                          report_only=True)]
    return ExperimentReport("dimension", cfg.echo(), recs, [])


def run_chaos(cfg, out: Path) -> ExperimentReport:
    p = cfg.params()
    norm = chaos.local_time_l2_truncated(cfg.x, [cfg.t], p, cfg.order_cap, cfg.quad_n, cfg.grade,
                                         cfg.alpha)
    out.mkdir(parents=True, exist_ok=True)
    table = out / "chaos_terms.csv"
    with open(table, "w") as fh:
        fh.write("m,composition,term,partial_sum\n")
        for row in norm.table_rows():
            comp = " ".join(str(c) for c in row["composition"])
            fh.write(f"{row['m']},{comp},{float(row['term'])!r},{float(row['partial_sum'])!r}\n")
    recs = [checks.record(
        "chaos_partial_sum", "||L(x,t)||_2^2 = sum_n int int beta beta R^n", norm.value, None, "none",
        None, details={"tail_estimate": norm.tail_estimate, "envelope_exponent": norm.exponent,
                       "diverges": norm.diverges}, report_only=True,
    )]
    if p.d == 1 and cfg.alpha == 0:
        recs.append(checks.record(
            "chaos_zeroth_term", "n=0 term: (int p_{u^{2HK}}(x) du)^2", norm.terms[0],
            chaos.zeroth_term_oracle(cfg.x, cfg.t, p), "abs", 1e-8,
            details={"oracle": "zeroth_term_oracle"},
        ))
        recs.append(checks.record(
            "chaos_vs_oracle", "||L(x,t)||_2^2 = sum_n int int beta beta R^n", norm.value,
            chaos.second_moment_oracle(cfg.x, cfg.t, p), "none", None,
            details={"oracle": "second_moment_oracle"}, report_only=True,
        ))
    return ExperimentReport("chaos", cfg.echo(), recs, [table.name])


def run_report_all(cfg, out: Path):
    names = None if cfg.only is None else set(cfg.only)
    if names is not None:
        bad = names - {c.name for c in checks.ACCEPTANCE}
        if bad:
            raise ConfigError(f"only: unknown check(s) {', '.join(sorted(bad))}")
    recs, timings = checks.run_checks(cfg.seed, names)
    rep = ExperimentReport("report-all", cfg.echo(), recs,
                           ["report.json", "report.csv", "timing.json"])
    emit_timing(timings, out / "timing.json")
    return rep


RUNNERS = {
    "simulate": run_simulate,
    "spectrum": run_spectrum,
    "verify": run_verify,
    "localtime": run_localtime,
    "dimension": run_dimension,
    "chaos": run_chaos,
    "report-all": run_report_all,
}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    out = Path(cfg.options.get("out_dir") or cfg.options.get("out"))
    rep = RUNNERS[cfg.command](cfg, out)
    if cfg.command == "report-all":
        emit(rep, "json", out / "report.json")
        emit(rep, "csv", out / "report.csv")
    else:
        emit(rep, "json", out / "report.json")
        rep.artifacts.append("report.json")
    return rep


# ------------------------------------------------------------ argparse

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bifbm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, *keys):
        sp.add_argument("--config", help="JSON file with option values (flags override)")
        table = {
            "h": dict(type=float), "k": dict(type=float), "d": dict(type=int),
            "t_max": dict(type=float), "grid_n": dict(type=int), "paths": dict(type=int),
            "seed": dict(type=int), "out": dict(), "t_min_frac": dict(type=float),
        }
        for key in keys:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, **table[key])

    sp = sub.add_parser("simulate", help="sample paths and write them to disk")
    common(sp, "h", "k", "d", "t_max", "grid_n", "paths", "seed", "out", "t_min_frac")
    sp.add_argument("--method", choices=METHODS)
    sp.add_argument("--grid", choices=("auto", "uniform", "log"))
    sp.add_argument("--format", choices=("csv", "binary", "both"))
    sp.add_argument("--n-modes", dest="n_modes", type=int)
    sp.add_argument("--lambda-max", dest="lambda_max", type=float)

    sp = sub.add_parser("spectrum", help="tabulate the spectral density")
    common(sp, "h", "k", "out")
    sp.add_argument("--lambda-max", dest="lambda_max", type=float)
    sp.add_argument("--n-lambda", dest="n_lambda", type=int)
    sp.add_argument("--tol", type=float)

    sp = sub.add_parser("verify", help="analytic checks over a parameter lattice")
    common(sp, "seed", "out")
    sp.add_argument("--lattice", help="'default' or a JSON file of [h, k] pairs")

    sp = sub.add_parser("localtime", help="binned occupation density, averaged over paths")
    common(sp, "h", "k", "d", "grid_n", "paths", "seed", "out", "t_min_frac")
    sp.add_argument("--bandwidth", type=float)
    sp.add_argument("--bins", type=int)

    sp = sub.add_parser("dimension", help="box-counting dimension estimates")
    common(sp, "h", "k", "d", "grid_n", "paths", "seed", "out", "t_min_frac")
    sp.add_argument("--target", choices=("level", "graph", "image"))
    sp.add_argument("--level", type=float)

    sp = sub.add_parser("chaos", help="truncated chaos norm of local time")
    common(sp, "h", "k", "out")
    sp.add_argument("--x", type=float)
    sp.add_argument("--t", type=float)
    sp.add_argument("--order-cap", dest="order_cap", type=int)
    sp.add_argument("--quad-n", dest="quad_n", type=int)
    sp.add_argument("--grade", type=int)
    sp.add_argument("--alpha", type=float)

    sp = sub.add_parser("report-all", help="run the full acceptance table")
    common(sp, "seed")
    sp.add_argument("--out-dir", dest="out_dir")
    sp.add_argument("--only", nargs="+", help="restrict to the named checks")
    return ap


def _read_config(path):
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    return doc


def main(argv=None) -> int:
    ap = _parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit 2 already
        return int(exc.code or 0)
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    try:
        cfg = merge_config(ns.command, _read_config(ns.config), flags)
    except ConfigError as exc:
        print(f"bifbm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rep = run(cfg)
    except ConfigError as exc:
        print(f"bifbm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BifbmError, OSError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"bifbm: compute error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    for r in rep.records:
        m = "-" if r.measured is None else f"{r.measured:.6g}"
        print(f"{r.status:11s} {r.name}: measured {m} reference {r.reference}")
    s = rep.summary()
    print(f"{s['pass']} pass, {s['fail']} fail, {s['report-only']} report-only")
    return rep.exit_status


if __name__ == "__main__":
    sys.exit(main())
