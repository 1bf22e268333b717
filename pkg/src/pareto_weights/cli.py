"""Command-line front end.

    pareto-weights simulate   --alpha 1.2 --n 1e4 --replicates 1e4 --out runs/mc
    pareto-weights recursion  --alpha 1.2 --n 1e4 --iterations 1e7 --out runs/chain
    pareto-weights analytic   --alpha 1.2 --n 1e6 --out runs/laws
    pareto-weights figure1    --input runs/mc --input runs/chain --out runs/fig1
    pareto-weights figure2    --alpha 1.2 --n 1e5 --out runs/fig2
    pareto-weights validate   --criteria 1,2,8 --out runs/report

Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import platform
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__, analytic
from .errors import ConfigError, DomainError, RegimeError
from .experiments import FIGURE1_PANELS, figure1_panels, figure2_curve, replicate_histograms
from .io import read_csv, write_binned, write_csv, write_histogram, write_json
from .recursion import chain_histograms, default_grids
from .sampling import AlphaParam, simulate_replicates
from .streams import DEFAULT_SEED

COMMANDS = ("simulate", "recursion", "analytic", "figure1", "figure2", "validate")

# desk-scale defaults and the full-scale settings (--paper-scale)
PRESETS = {
    "desk": {
        "simulate": {"n": [10_000], "replicates": 10_000},
        "recursion": {"n": [10_000], "iterations": 10**7},
        "analytic": {"n": [10**6]},
        "figure1": {"n": [10_000], "replicates": 10_000, "iterations": 10**7},
        "figure2": {"n": [100_000], "replicates": 10_000},
    },
    "full": {
        "simulate": {"n": [10**6], "replicates": 10**5},
        "recursion": {"n": [10**4, 10**5, 10**6], "iterations": 2 * 10**8},
        "analytic": {"n": [10**6]},
        "figure1": {"n": [10**4, 10**5, 10**6], "replicates": 10**5, "iterations": 2 * 10**8},
        "figure2": {"n": [10**6], "replicates": 10**5},
    },
}

HIST_SCALES = {"y2": "c_n", "ne": "inv_c_n"}


@dataclass
class ExperimentConfig:
    command: str
    alpha: float = 1.2
    n: List[int] = field(default_factory=list)
    replicates: Optional[int] = None
    iterations: Optional[int] = None
    burn_in: int = 10_000
    thin: int = 1
    chains: int = 1
    seed: int = DEFAULT_SEED
    threads: int = 1
    out: str = "out"
    bins_per_decade: int = 10
    linear_bins: Optional[int] = None
    paper_scale: bool = False
    inputs: List[str] = field(default_factory=list)
    criteria: Optional[List[int]] = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.replicates is not None and self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.iterations is not None and self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.iterations is not None and self.burn_in >= self.iterations:
            raise ConfigError(f"burn-in ({self.burn_in}) must be smaller than iterations ({self.iterations})")
        if self.thin < 1 or self.chains < 1 or self.threads < 1 or self.bins_per_decade < 1:
            raise ConfigError("thin, chains, threads and bins-per-decade must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.command in ("recursion", "figure1", "figure2") and not 1.0 < self.alpha < 2.0:
            raise RegimeError(f"{self.command} needs 1 < alpha < 2, got {self.alpha}")
        if self.command == "simulate" and not self.alpha > 1.0:
            raise RegimeError("simulate reports R_N / (mu N) and needs alpha > 1")


def _count(text: str) -> int:
    """Parse counts such as 10000, 1e4 or 2e8."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v) or v != int(v) or v < 0:
        raise argparse.ArgumentTypeError(f"not a non-negative integer: {text!r}")
    return int(v)


def _criteria(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad criteria list {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pareto-weights", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--alpha", type=float, default=1.2)
        sp.add_argument("--n", type=_count, action="append", help="population size; repeat for a grid")
        sp.add_argument("--seed", type=_count, default=DEFAULT_SEED)
        sp.add_argument("--threads", type=_count, default=1)
        sp.add_argument("--out", default=f"out/{name}")
        sp.add_argument("--bins-per-decade", type=_count, default=10)
        sp.add_argument("--linear-bins", type=_count, default=None,
                        help="use this many linear bins instead of log bins")
        sp.add_argument("--paper-scale", action="store_true",
                        help="full-scale settings: N up to 1e6, 1e5 replicates, 2e8 chain steps")
        if name in ("simulate", "figure1", "figure2"):
            sp.add_argument("--replicates", type=_count)
        if name in ("recursion", "figure1"):
            sp.add_argument("--iterations", type=_count, help="chain length including burn-in")
            sp.add_argument("--burn-in", type=_count, default=10_000)
            sp.add_argument("--thin", type=_count, default=1)
            sp.add_argument("--chains", type=_count, default=1)
        if name in ("figure1", "figure2"):
            sp.add_argument("--input", action="append", default=[],
                            help="directory of an earlier simulate/recursion run")
        if name == "validate":
            sp.add_argument("--criteria", type=_criteria, default=None, help="e.g. 1,2,8")
    return ap


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    preset = PRESETS["full" if ns.paper_scale else "desk"].get(ns.command, {})
    cfg = ExperimentConfig(
        command=ns.command, alpha=ns.alpha, n=list(ns.n or preset.get("n", [10_000])),
        replicates=getattr(ns, "replicates", None) or preset.get("replicates"),
        iterations=getattr(ns, "iterations", None) or preset.get("iterations"),
        burn_in=getattr(ns, "burn_in", 10_000), thin=getattr(ns, "thin", 1),
        chains=getattr(ns, "chains", 1), seed=ns.seed, threads=ns.threads, out=ns.out,
        bins_per_decade=ns.bins_per_decade, linear_bins=ns.linear_bins or None,
        paper_scale=ns.paper_scale, inputs=list(getattr(ns, "input", []) or []),
        criteria=getattr(ns, "criteria", None),
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------

def _versions() -> dict:
    import numba
    import scipy
    return {"pareto_weights": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


class Manifest:
    """Collects every file a command writes; saved as manifest.json."""

    def __init__(self, cfg: ExperimentConfig):
        self.root = Path(cfg.out)
        self.root.mkdir(parents=True, exist_ok=True)
        self.data = {"command": cfg.command, "config": asdict(cfg), "versions": _versions(),
                     "runs": [], "files": []}

    def path(self, rel: str) -> Path:
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def add(self, rel: str, run: Optional[dict] = None) -> str:
        if rel in self.data["files"]:
            raise ConfigError(f"output {rel} written twice")
        self.data["files"].append(rel)
        if run is not None:
            run.setdefault("files", []).append(rel)
        return rel

    def save(self) -> Path:
        return write_json(self.root / "manifest.json", self.data)


def _scale(key: str, p: AlphaParam) -> float:
    s = HIST_SCALES.get(key)
    if s == "c_n":
        return p.c_n
    if s == "inv_c_n":
        return 1.0 / p.c_n
    return 1.0


def _write_hists(man: Manifest, run: dict, sub: str, hists: dict, p: AlphaParam) -> None:
    tallies = {}
    for key, g in hists.items():
        rel = f"{sub}/hist_{key}.csv"
        write_histogram(man.path(rel), g, _scale(key, p) if 1.0 <= p.alpha < 2.0 else 1.0)
        man.add(rel, run)
        tallies[key] = {"total": g.total, "underflow": g.underflow, "overflow": g.overflow}
    run["histograms"] = tallies


def _run_simulate(cfg: ExperimentConfig, man: Manifest, n: int) -> dict:
    p = AlphaParam(cfg.alpha, n)
    t = simulate_replicates(p, cfg.replicates, cfg.seed, stream=n, threads=cfg.threads)
    run = {"n": n, "replicates": cfg.replicates, "stream": [n]}
    sub = f"n{n}"
    rel = f"{sub}/records.csv"
    write_csv(man.path(rel), ["replicate", "r_n", "x1", "x2", "w1", "w2", "y2", "ne", "u2"],
              [np.arange(len(t)), t.r_n, t.x1, t.x2, t.w1, t.w2, t.y2, t.ne, t.u2])
    man.add(rel, run)
    hists = replicate_histograms(t, default_grids(p, cfg.bins_per_decade, cfg.linear_bins))
    _write_hists(man, run, sub, hists, p)
    man.data["runs"].append(run)
    return {"table": t, "hists": hists}


def _run_recursion(cfg: ExperimentConfig, man: Manifest, n: int) -> dict:
    p = AlphaParam(cfg.alpha, n)
    hists = chain_histograms(p, cfg.iterations, cfg.burn_in, cfg.thin, cfg.seed, stream=n,
                             chains=cfg.chains, threads=cfg.threads,
                             grids=default_grids(p, cfg.bins_per_decade, cfg.linear_bins))
    run = {"n": n, "iterations": cfg.iterations, "burn_in": cfg.burn_in, "thin": cfg.thin,
           "chains": cfg.chains, "stream": [1, n]}
    _write_hists(man, run, f"n{n}", hists, p)
    man.data["runs"].append(run)
    return {"hists": hists}


def cmd_simulate(cfg: ExperimentConfig) -> int:
    man = Manifest(cfg)
    for n in cfg.n:
        _run_simulate(cfg, man, n)
    man.save()
    return 0


def cmd_recursion(cfg: ExperimentConfig) -> int:
    man = Manifest(cfg)
    for n in cfg.n:
        _run_recursion(cfg, man, n)
    man.save()
    return 0


def cmd_analytic(cfg: ExperimentConfig) -> int:
    man = Manifest(cfg)
    a = cfg.alpha
    for n in cfg.n:
        p = AlphaParam(a, n)
        run = {"n": n}
        sub = f"n{n}"
        report = {"alpha": a, "n": n, "moments": []}
        if a >= 1.0:
            for k in range(2, 7):
                m = analytic.expected_yk(p, k)
                report["moments"].append({"k": m.k, "regime": m.regime.value, "value": m.value})
        if 1.0 < a < 2.0:
            report["c_n"] = p.c_n
            report["pair_moment_2_2"] = analytic.pair_moment(p, 2, 2)
            report["cv_y2"] = analytic.cv_y2(p)
            report["exact_finite_n"] = {"e_y2": analytic.expected_yk_finite(p, 2),
                                        "cv_y2": analytic.cv_y2_finite(p)}
            report["ne_mode"] = analytic.ne_mode(a)
            report["order_statistics"] = asdict(analytic.order_stat_moments(p))
            report["integrals"] = {
                "rho_over_n": analytic.law_integral("rho", p) / n,
                "w_rho": analytic.law_integral("rho", p, 1),
                "pi_w1": analytic.law_integral("pi_w1", p),
                "pi_w2": analytic.law_integral("pi_w2", p),
                "pi_y2": analytic.law_integral("pi_y2", p),
                "y_pi_y2_over_c_n": analytic.law_integral("pi_y2", p, 1) / p.c_n,
                "pi_ne": analytic.law_integral("pi_ne", p),
            }
            laws = ("rho", "pi_w1", "pi_w2", "pi_y2", "pi_ne", "sweepstakes")
        else:
            laws = ("rho",) if a >= 1.0 else ()
        for law in laws:
            lo, hi = analytic.law_domain(law, p)
            if law == "sweepstakes":
                xs = np.geomspace(0.5 * p.mu * n, 1e3 * p.mu * n, 200)
            elif law == "pi_ne":
                xs = np.geomspace(1.0 + 1e-6, 2.0 * hi, 200)
            else:
                xs = np.geomspace(max(lo, 1e-300) / 2.0 if lo > 0 else 1e-12, 1.0 - 1e-9, 200)
            rel = f"{sub}/curve_{law}.csv"
            analytic.curve_table(law, p, xs).to_csv(man.path(rel))
            man.add(rel, run)
        rel = f"{sub}/moments.json"
        write_json(man.path(rel), report)
        man.add(rel, run)
        man.data["runs"].append(run)
    man.save()
    return 0


def _load_inputs(inputs: List[str]) -> Dict[str, dict]:
    """Map 'simulate'/'recursion' to {n: {key: (edges, density)}} from earlier runs."""
    found: Dict[str, dict] = {}
    for d in inputs:
        root = Path(d)
        mpath = root / "manifest.json"
        if not mpath.exists():
            raise ConfigError(f"no manifest.json in input directory {d}")
        man = json.loads(mpath.read_text())
        kind = man["command"]
        if kind not in ("simulate", "recursion"):
            raise ConfigError(f"input {d} holds a {kind!r} run; need simulate or recursion")
        for run in man["runs"]:
            entry = found.setdefault(kind, {}).setdefault(run["n"], {"alpha": man["config"]["alpha"]})
            for rel in run["files"]:
                name = Path(rel).name
                if name.startswith("hist_"):
                    tab = read_csv(root / rel)
                    edges = np.append(tab["edge_lo"], tab["edge_hi"][-1])
                    entry[name[5:-4]] = (edges, tab["density"])
                elif name == "records.csv":
                    entry["records"] = root / rel
    return found


def _gnuplot_figure1(n: int) -> str:
    lines = ["# gnuplot stub: one panel per CSV", "set datafile separator ','",
             "set logscale xy", "set key top right"]
    for panel, key, absc, law in FIGURE1_PANELS:
        f = f"n{n}/figure1_panel_{panel}.csv"
        lines += [f"set title 'panel {panel}: {key}'", f"set xlabel '{absc}'",
                  f"plot '{f}' using 1:4 with lines lc 'gray' title 'Monte Carlo', \\",
                  f"     '{f}' using 1:5 with lines lc 'blue' title 'recursion', \\",
                  f"     '{f}' using 1:6 with lines lc 'black' lw 2 title '{law}'", "pause -1"]
    return "\n".join(lines) + "\n"


def cmd_figure1(cfg: ExperimentConfig) -> int:
    man = Manifest(cfg)
    loaded = _load_inputs(cfg.inputs) if cfg.inputs else {}
    ns = sorted(set(loaded.get("simulate", {})) | set(loaded.get("recursion", {}))) if loaded else cfg.n
    for n in ns:
        p = AlphaParam(cfg.alpha, n)
        run = {"n": n}
        if loaded:
            emp_src = loaded.get("simulate", {}).get(n, {})
            ch_src = loaded.get("recursion", {}).get(n, {})
            for src in (emp_src, ch_src):
                if src and src["alpha"] != cfg.alpha:
                    raise ConfigError(f"input alpha {src['alpha']} differs from --alpha {cfg.alpha}")
            grid_src = emp_src or ch_src
            edges = {k: grid_src[k][0] for k in ("w1", "w2", "y2", "ne")}
            emp = {k: emp_src[k][1] for k in edges if k in emp_src}
            chain = {k: ch_src[k][1] for k in edges if k in ch_src}
            for k in edges:
                for src in (emp_src, ch_src):
                    if k in src and not np.array_equal(src[k][0], edges[k]):
                        raise ConfigError("simulate and recursion inputs use different bins")
        else:
            grids = default_grids(p, cfg.bins_per_decade, cfg.linear_bins)
            from .sampling import simulate_replicates as _sim
            t = _sim(p, cfg.replicates, cfg.seed, stream=n, threads=cfg.threads)
            mc = replicate_histograms(t, grids)
            ch = chain_histograms(p, cfg.iterations, cfg.burn_in, cfg.thin, cfg.seed, stream=n,
                                  chains=cfg.chains, threads=cfg.threads, grids=grids)
            edges = {k: g.edges for k, g in grids.items()}
            emp = {k: g.density for k, g in mc.items()}
            chain = {k: g.density for k, g in ch.items()}
        for pan in figure1_panels(p, edges, emp, chain):
            header, cols = pan.columns()
            rel = f"n{n}/figure1_panel_{pan.panel}.csv"
            write_csv(man.path(rel), header, cols)
            man.add(rel, run)
        rel = f"figure1_n{n}.gp"
        man.path(rel).write_text(_gnuplot_figure1(n))
        man.add(rel, run)
        man.data["runs"].append(run)
    man.save()
    return 0


_GP2 = """# gnuplot stub
set datafile separator ','
set logscale xy
set xlabel 'R_N / (mu N)'
set ylabel 'Y_2 / c_N'
plot '{f}' using 3:5:6:7 with yerrorbars pt 7 title 'binned mean, 95%', \\
     '{f}' using 3:9 with lines lw 2 title 'recruitment curve'
pause -1
"""


def cmd_figure2(cfg: ExperimentConfig) -> int:
    man = Manifest(cfg)
    loaded = _load_inputs(cfg.inputs).get("simulate", {}) if cfg.inputs else {}
    if cfg.inputs and not loaded:
        raise ConfigError("figure2 needs a simulate run as input")
    ns = sorted(loaded) if loaded else cfg.n
    for n in ns:
        p = AlphaParam(cfg.alpha, n)
        if loaded:
            if "records" not in loaded[n]:
                raise ConfigError(f"input for n={n} has no records.csv")
            rec = read_csv(loaded[n]["records"])
            r_n, y2 = rec["r_n"], rec["y2"]
        else:
            t = simulate_replicates(p, cfg.replicates, cfg.seed, stream=n, threads=cfg.threads)
            r_n, y2 = t.r_n, t.y2
        curve, sweep = figure2_curve(p, r_n, y2, cfg.bins_per_decade)
        run = {"n": n}
        rel = f"n{n}/figure2.csv"
        write_binned(man.path(rel), curve, {"sweepstakes_y2_over_c_n": sweep})
        man.add(rel, run)
        rel = f"figure2_n{n}.gp"
        man.path(rel).write_text(_GP2.format(f=f"n{n}/figure2.csv"))
        man.add(rel, run)
        man.data["runs"].append(run)
    man.save()
    return 0


def cmd_validate(cfg: ExperimentConfig) -> int:
    from .acceptance import CRITERIA, run_all
    ids = cfg.criteria or sorted(CRITERIA)
    bad = [i for i in ids if i not in CRITERIA]
    if bad:
        raise ConfigError(f"unknown criteria {bad}")
    man = Manifest(cfg)
    results = run_all(ids, seed=cfg.seed)
    for r in results:
        print(r.summary())
        for c in r.checks:
            print(c.line())
    ok = all(r.passed for r in results)
    rel = "validation.json"
    write_json(man.path(rel), {"passed": ok, "criteria": [r.to_dict() for r in results]})
    man.add(rel)
    man.save()
    return 0 if ok else 1


HANDLERS = {"simulate": cmd_simulate, "recursion": cmd_recursion, "analytic": cmd_analytic,
            "figure1": cmd_figure1, "figure2": cmd_figure2, "validate": cmd_validate}


def main(argv: Optional[List[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return HANDLERS[cfg.command](cfg)
    except (ConfigError, DomainError, RegimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
