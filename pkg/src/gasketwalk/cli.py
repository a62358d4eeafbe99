"""Command-line workbench.

Every subcommand writes a table (CSV or JSON) and a JSON manifest echoing
the run configuration, excluded-node counts and timings. Numbers are
written with 17 significant digits so tables round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import click
import numpy as np

from .green import SingularityError
from .quadrature import CircleGrid, QuadratureError

EXIT_INVARIANT = 4
EXIT_MATH = 3

GOLDEN = [
    Fraction(1, 8), Fraction(1, 12), Fraction(1, 4), Fraction(1, 6), Fraction(1, 10), Fraction(1, 20),
    Fraction(17, 132), Fraction(19, 1056), Fraction(25, 264), Fraction(91, 1056),
    Fraction(319, 528), Fraction(2173, 1152), Fraction(2173, 696),
    Fraction(7093, 17424), Fraction(27073, 278784), Fraction(18049, 69696),
    Fraction(59497, 278784), Fraction(83521, 278784), Fraction(7, 9), Fraction(17, 36),
]


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def exact(v: float) -> str:
    """'p/q' for values matching a known golden rational, else ''."""
    if not np.isfinite(v):
        return ""
    if v == 0:
        return "0"
    for f in GOLDEN:
        if abs(v - float(f)) < 1e-11:
            return f"{f.numerator}/{f.denominator}"
    return ""


@dataclass
class RunConfig:
    command: str
    coin: str = "quantum"
    levels: list[int] = field(default_factory=list)
    quadrature: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    fit_range: list[int] | None = None
    extra: dict = field(default_factory=dict)


class Run:
    """Collects rows and manifest entries; writes once at the end."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.header: list[str] = []
        self.rows: list[list] = []
        self.payload = None
        self.events: list[dict] = []
        self.start = time.perf_counter()

    def table(self, header: list[str]):
        self.header = header

    def add(self, *row):
        self.rows.append(list(row))

    def event(self, **kw):
        self.events.append(kw)

    def render(self) -> str:
        if self.payload is not None:
            return json.dumps(self.payload, indent=1, sort_keys=True) + "\n"
        if self.config.output.get("format") == "json":
            recs = [{h: _jsonable(v) for h, v in zip(self.header, r)} for r in self.rows]
            return json.dumps(recs, indent=1) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            w.writerow([fmt(v) for v in r])
        return buf.getvalue()

    def manifest(self) -> dict:
        try:
            version = metadata.version("artifact")
        except metadata.PackageNotFoundError:
            version = "unknown"
        return {
            "config": asdict(self.config),
            "version": version,
            "events": self.events,
            "elapsed_s": time.perf_counter() - self.start,
            "threads": os.environ.get("GASKETWALK_THREADS"),
        }

    def finish(self):
        text = self.render()
        out = self.config.output.get("path")
        if out:
            Path(out).write_text(text)
            man = self.config.output.get("manifest") or f"{out}.manifest.json"
        else:
            sys.stdout.write(text)
            man = self.config.output.get("manifest")
        if man:
            Path(man).write_text(json.dumps(self.manifest(), indent=1, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def parse_levels(text: str) -> list[int]:
    """'5' -> [5]; '2..20' -> [2, ..., 20]."""
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = (int(p) for p in text.split(".."))
            levels = list(range(a, b + 1))
        else:
            levels = [int(text)]
    except ValueError:
        raise click.BadParameter(f"levels must be 'n' or 'a..b', got {text!r}") from None
    if not levels or levels[-1] < 1 or levels[0] < 0:
        raise click.BadParameter("empty or zero level range")
    return levels


def _read_config(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith(".json"):
        data = json.loads(text)
    else:
        data = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            data[key.strip()] = val.strip()
    return {k.replace("-", "_"): v for k, v in data.items()}


def grid_options(f):
    f = click.option("--nodes", type=int, default=4096, show_default=True, help="Trapezoid node count.")(f)
    f = click.option("--scheme", type=click.Choice(["trapezoid", "mc"]), default="trapezoid", show_default=True)(f)
    f = click.option("--mc-samples", type=int, default=1_000_000, show_default=True)(f)
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    return f


def output_options(f):
    f = click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="csv", show_default=True)(f)
    f = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Table path (default stdout).")(f)
    f = click.option("--manifest", type=click.Path(dir_okay=False), default=None, help="Manifest path.")(f)
    return f


def coin_option(f):
    return click.option("--coin", type=click.Choice(["quantum", "classical"]), default="quantum", show_default=True)(f)


def _grid(nodes, scheme, mc_samples, seed) -> CircleGrid:
    return CircleGrid(node_count=nodes, scheme=scheme, samples=mc_samples, seed=seed)


def _config(command, coin, levels, nodes, scheme, mc_samples, seed, fmt_, out, manifest, **extra) -> RunConfig:
    quad = {"scheme": scheme, "nodes": nodes, "mc_samples": mc_samples, "seed": seed, "offset": 0.5}
    return RunConfig(command, coin, levels, quad, {}, {"format": fmt_, "path": out, "manifest": manifest}, None, extra)


def _guard(fn):
    """Map math-layer errors to exit codes with context."""

    def wrapper(*a, **kw):
        try:
            return fn(*a, **kw)
        except (SingularityError, QuadratureError) as e:
            click.echo(f"error: {type(e).__name__}: {e}", err=True)
            sys.exit(EXIT_MATH)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _invariant(run: Run, name: str, ok: bool, detail: str = ""):
    run.event(invariant=name, ok=bool(ok), detail=detail)
    if not ok:
        run.finish()
        click.echo(f"invariant failed: {name} {detail}", err=True)
        sys.exit(EXIT_INVARIANT)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key=value or JSON file with option defaults.")
@click.pass_context
def main(ctx, config_path):
    """Quantum and classical walks on the doubled Sierpinski gasket."""
    if config_path:
        values = _read_config(config_path)
        ctx.default_map = {name: values for name in main.commands}


@main.command()
@click.option("--level", type=int, required=True)
@output_options
def lattice(level, fmt_, out, manifest):
    """Dump sites and out-directions of F(n) ∪ F(n)'."""
    from .lattice import build_level

    cfg = RunConfig("lattice", "", [level], {}, {}, {"format": fmt_, "path": out, "manifest": manifest})
    run = Run(cfg)
    g = build_level(level)
    run.table(["x1", "x2", "out_dirs"])
    for s in g.sites:
        run.add(s[0], s[1], " ".join(str(k) for k in g.out[s]))
    run.event(sites=len(g.sites), cells=len(g.cells))
    _invariant(run, "four out-directions per site", all(len(g.out[s]) == 4 for s in g.sites))
    run.finish()


@main.command("exit-dist")
@click.option("--level", type=int, required=True)
@coin_option
@grid_options
@output_options
@_guard
def exit_dist(level, coin, nodes, scheme, mc_samples, seed, fmt_, out, manifest):
    """Exit probability blocks P(0, y) for y in {0, a, b, a', b'}."""
    from .green import level0_out
    from .observables import BOUNDARY, exit_distribution

    if level < 1:
        raise click.BadParameter("level must be at least 1", param_hint="--level")
    run = Run(_config("exit-dist", coin, [level], nodes, scheme, mc_samples, seed, fmt_, out, manifest))
    dist = exit_distribution(level, _grid(nodes, scheme, mc_samples, seed), coin)
    run.table(["n", "block", "i", "j", "value", "exact"])
    rows_lab = level0_out("0")
    for y in BOUNDARY:
        cols = level0_out(y)
        for a, i in enumerate(rows_lab):
            for b, j in enumerate(cols):
                v = dist.blocks[y][a, b]
                run.add(level, y, i, j, float(v), exact(v))
    run.event(excluded_nodes=dist.excluded_nodes)
    tot = dist.totals()
    _invariant(run, "entries in [0, 1]", all(np.all((b >= -1e-12) & (b <= 1 + 1e-12)) for b in dist.blocks.values()))
    _invariant(run, "start-row totals <= 1", bool(np.all(tot <= 1 + 1e-9)), fmt(float(tot.max())))
    if coin == "classical":
        _invariant(run, "classical totals = 1", bool(np.allclose(tot, 1, atol=1e-9)))
    run.finish()


@main.command()
@click.option("--levels", "levels_", default="25", show_default=True, help="Deepest level n_max.")
@grid_options
@output_options
@_guard
def recurrence(levels_, nodes, scheme, mc_samples, seed, fmt_, out, manifest):
    """Integrals of |u_k|² for k = 1..6, levels 1..n_max."""
    from .observables import recurrence_scan

    n_max = parse_levels(levels_)[-1]
    run = Run(_config("recurrence", "quantum", [n_max], nodes, scheme, mc_samples, seed, fmt_, out, manifest))
    scan = recurrence_scan(n_max, _grid(nodes, scheme, mc_samples, seed))
    run.table(["n", "k", "value"])
    for n, row in zip(scan.levels, scan.sextet):
        for k, v in enumerate(row, start=1):
            run.add(int(n), k, float(v))
    run.event(excluded_nodes=scan.excluded.tolist())
    run.finish()


def _fit_rows(run: Run, family: str, fit, labels_i=None, labels_j=None):
    s = np.atleast_2d(fit.slopes)
    if np.ndim(fit.slopes) == 0:
        run.add(family, "", "", float(fit.slopes), float(fit.intercepts), float(fit.r2), bool(fit.na_mask))
        return
    for a in range(s.shape[0]):
        for b in range(s.shape[1]):
            na = bool(fit.na_mask[a, b])
            run.add(family, labels_i[a], labels_j[b], "NA" if na else float(fit.slopes[a, b]),
                    "NA" if na else float(fit.intercepts[a, b]), "NA" if na else float(fit.r2[a, b]), na)


@main.command()
@coin_option
@click.option("--levels", "levels_", default="8..25", show_default=True, help="Fit range a..b.")
@click.option("--p-inf", type=click.Choice(["deepest", "theory"]), default="deepest", show_default=True)
@click.option("--inf-level", type=int, default=None, help="Level used as the limit estimate.")
@grid_options
@output_options
@_guard
def exponents(coin, levels_, p_inf, inf_level, nodes, scheme, mc_samples, seed, fmt_, out, manifest):
    """Localization exponents β, γ (4x4) and δ, η (scalars)."""
    from .green import level0_out
    from .observables import delta_eta, exponent_beta_gamma

    levels = parse_levels(levels_)
    rng = (levels[0], levels[-1])
    if len(levels) < 3:
        raise click.BadParameter("a fit needs at least three levels", param_hint="--levels")
    cfg = _config("exponents", coin, levels, nodes, scheme, mc_samples, seed, fmt_, out, manifest,
                  p_inf=p_inf, inf_level=inf_level)
    cfg.fit_range = list(rng)
    run = Run(cfg)
    grid = _grid(nodes, scheme, mc_samples, seed)
    rep = exponent_beta_gamma(rng, grid, coin, p_inf, inf_level)
    de = delta_eta(rng, grid, coin, p_inf, inf_level, scan=rep.scan)
    run.table(["family", "i", "j", "slope", "intercept", "r2", "na"])
    lab0 = level0_out("0")
    _fit_rows(run, "beta", rep.beta, lab0, lab0)
    _fit_rows(run, "gamma", rep.gamma, lab0, level0_out("a"))
    _fit_rows(run, "delta", de.delta)
    _fit_rows(run, "eta", de.eta)
    _fit_rows(run, "eta_relative", de.eta_relative)
    if rep.scan is not None:
        run.event(excluded_nodes=rep.scan.excluded.tolist())
    run.event(p_inf_converged=rep.p_inf_converged)
    run.finish()


@main.command()
@click.option("--level", type=int, required=True)
@click.option("--observable", type=click.Choice(["prob", "etime"]), default="prob", show_default=True)
@coin_option
@grid_options
@output_options
@_guard
def passage(level, observable, coin, nodes, scheme, mc_samples, seed, fmt_, out, manifest):
    """First passage to the outer corners: probabilities or E(T) contributions."""
    from .lattice import build_level
    from .passage import CORNERS, classical_passage, passage_statistics

    if level < 1:
        raise click.BadParameter("level must be at least 1", param_hint="--level")
    run = Run(_config("passage", coin, [level], nodes, scheme, mc_samples, seed, fmt_, out, manifest,
                      observable=observable))
    g1 = build_level(1)
    if coin == "classical":
        prob, etime = classical_passage(level)
    else:
        res = passage_statistics(level, _grid(nodes, scheme, mc_samples, seed))
        prob, etime = res.prob, res.etime
        run.event(excluded_nodes=res.excluded, imag_residue=res.imag_residue)
        run.event(total=res.total.tolist(), expected=res.expected.tolist(), conditional=res.conditional.tolist())
    table = prob if observable == "prob" else etime
    run.table(["target", "i", "j", "value", "exact"])
    origin = g1.out[(0, 0)]
    for c in CORNERS:
        labels = g1.out[g1.corner_sites[c]]
        for a, i in enumerate(origin):
            for b, j in enumerate(labels):
                v = float(table[c][a, b])
                run.add(c, i, j, v, exact(v))
    tot = sum(p.sum(axis=-1) for p in prob.values())
    _invariant(run, "passage probability <= 1", bool(np.all(tot <= 1 + 1e-9)), fmt(float(np.max(tot))))
    run.finish()


@main.command()
@click.option("--observable", type=click.Choice(["phi", "triple", "exponents"]), default="phi", show_default=True)
@click.option("--levels", "levels_", default="10", show_default=True)
@output_options
def classical(observable, levels_, fmt_, out, manifest):
    """Uniform-coin recursions: Φ orbit, Green triple orbit, exponents."""
    from .classical import classical_exponents, phi_orbit, triple_orbit

    k = parse_levels(levels_)[-1]
    run = Run(RunConfig("classical", "classical", [k], {}, {}, {"format": fmt_, "path": out, "manifest": manifest},
                        None, {"observable": observable}))
    if observable == "phi":
        run.table(["n", "phi0", "phi1", "phi0_plus_4phi1", "phi0_exact", "phi1_exact"])
        for p in phi_orbit(k):
            run.add(p.level, float(p.phi0), float(p.phi1), float(p.phi0 + 4 * p.phi1), str(p.phi0), str(p.phi1))
    elif observable == "triple":
        run.table(["n", "u1", "u2", "u3", "sum"])
        for t in triple_orbit(k):
            u = t.as_array().real
            run.add(t.level, *(float(x) for x in u), float(u.sum()))
    else:
        ex = classical_exponents(max(k, 2))
        run.table(["n", "E_T", "E_tau"])
        for n, (a, b) in enumerate(zip(ex.passage_times, ex.return_times), start=1):
            run.add(n, float(a), float(b))
        run.event(d_w=ex.d_w, r_w=ex.r_w, passage_ratios=ex.passage_ratios.tolist(),
                  return_ratios=ex.return_ratios.tolist())
    run.finish()


@main.command()
@click.option("--level", type=int, required=True)
@click.option("--start", default="0,0,e0", show_default=True, help="Start state 'x1,x2,eK'.")
@click.option("--tmax", type=int, default=40, show_default=True)
@click.option("--absorb", type=click.Choice(["tau", "T"]), default="tau", show_default=True)
@coin_option
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--manifest", type=click.Path(dir_okay=False), default=None)
def oracle(level, start, tmax, absorb, coin, out, manifest):
    """Brute-force absorbing evolution; JSON ledger of exit amplitudes."""
    from .oracle import evolve_absorbing, parse_start

    st = parse_start(start)
    run = Run(RunConfig("oracle", coin, [level], {}, {"mass_balance": 1e-10}, {"format": "json", "path": out,
                        "manifest": manifest}, None, {"start": start, "tmax": tmax, "absorb": absorb}))
    res = evolve_absorbing(level, st, tmax, coin, absorb)
    captured = {}
    for s, amps in sorted(res.exits.items()):
        for t in np.flatnonzero(amps):
            captured.setdefault(str(int(t)), {})[str(s)] = [float(amps[t].real), float(amps[t].imag)]
    balance = float(res.mass_balance().max()) if coin == "quantum" else None
    run.payload = {"level": level, "start": str(st), "absorb": absorb, "coin": coin, "captured": captured,
                   "survivor_norm": [float(x) for x in res.survivor_norm], "max_mass_balance": balance}
    if coin == "quantum":
        _invariant(run, "amplitude mass balance", balance < 1e-10, fmt(balance))
    run.finish()


@main.command("plot-data")
@coin_option
@click.option("--levels", "levels_", default="8..25", show_default=True)
@click.option("--family", type=click.Choice(["delta", "eta", "eta_relative", "beta", "gamma", "phi1", "all"]),
              default="all", show_default=True)
@click.option("--p-inf", type=click.Choice(["deepest", "theory"]), default="deepest", show_default=True)
@grid_options
@output_options
@_guard
def plot_data(coin, levels_, family, p_inf, nodes, scheme, mc_samples, seed, fmt_, out, manifest):
    """Long-format series (n, -ln value, fitted line) for external plotting."""
    from .plotdata import exponent_series

    levels = parse_levels(levels_)
    cfg = _config("plot-data", coin, levels, nodes, scheme, mc_samples, seed, fmt_, out, manifest,
                  family=family, p_inf=p_inf)
    run = Run(cfg)
    series = exponent_series(levels, _grid(nodes, scheme, mc_samples, seed), coin, family, p_inf)
    run.table(["series", "n", "neg_log_value", "fitted_line"])
    for name, pts in series.items():
        for n, y, f in pts:
            run.add(name, n, y, "" if f is None else f)
    run.finish()


if __name__ == "__main__":
    main()
