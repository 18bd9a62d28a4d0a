"""Command-line entry point: ``rdcn gen | decompose | schedule | verify | bounds | sweep``.

Exit codes: 0 success, 1 a schedule failed verification, 2 bad input.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import analytics
from .bvn import NoPerfectMatching, NotDoublyStochastic, decompose
from .experiments import EXPERIMENTS, SweepSpec, rows_to_csv, run_sweep
from .fixtures import ring_m2_schedule
from .matrix import (InvalidMatrix, load_csv, make_mv, make_mvu, make_perm,
                     make_uniform, metrics, save_csv, to_csv_text)
from .schedule import (completion_time, dump_schedule, load_schedule, skewness,
                       verify_complete, verify_epsilon, verify_feasible)
from .systems import SYSTEMS, SystemConfig, run
from .traffic import InvalidParams, TmParams, generate_tm

BAD_INPUT = (InvalidMatrix, InvalidParams, NotDoublyStochastic, NoPerfectMatching,
             ValueError, KeyError, OSError)


class BadInput(click.ClickException):
    exit_code = 2


def common(f):
    """Flags shared by every subcommand."""
    opts = [
        click.option("--n", "n", type=int, default=64, show_default=True, help="Node count."),
        click.option("--rate", type=float, default=1.0, show_default=True, help="Link rate r."),
        click.option("--rb", type=float, default=None,
                     help="BvN reconfiguration time (default 0, or the sweep's own)."),
        click.option("--rr", type=float, default=None,
                     help="rr reconfiguration time per slot (needs --delta)."),
        click.option("--eta", type=float, default=None, help="rr duty cycle (default 1)."),
        click.option("--delta", type=float, default=None,
                     help="Fixed rr slot hold time; omit for per-schedule slots."),
        click.option("--eps", type=float, default=1e-4, show_default=True,
                     help="Decomposition tolerance (Frobenius)."),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--repeats", type=int, default=30, show_default=True),
        click.option("--quantize", is_flag=True, help="Round rr cycles up to whole cycles."),
        click.option("--literal", is_flag=True,
                     help="Weight large flows by t_l/n_l instead of c_l/n_l."),
        click.option("--json", "as_json", is_flag=True, help="Machine-readable output."),
    ]
    for opt in reversed(opts):
        f = opt(f)

    @functools.wraps(f)
    def wrapper(*args, **kw):
        try:
            return f(*args, **kw)
        except click.ClickException:
            raise
        except BAD_INPUT as exc:
            raise BadInput(str(exc)) from None
    return wrapper


def make_config(rate, rb, rr, eta, delta, eps, quantize) -> SystemConfig:
    if rr is not None:
        if delta is None:
            raise BadInput("--rr needs --delta")
        if eta is not None:
            raise BadInput("give either --rr or --eta, not both")
        eta = delta / (delta + rr)
    if quantize and delta is None:
        raise BadInput("--quantize needs --delta")
    return SystemConfig(r=rate, R_b=rb or 0.0, eta=1.0 if eta is None else eta,
                        delta=delta, quantize=quantize, eps=eps)


def emit(obj: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(obj))
    else:
        for k, v in obj.items():
            click.echo(f"{k}: {v}")


@click.group()
def main():
    """Schedule demand matrices on BvN, round-robin and composite fabrics."""


@main.command()
@click.option("--family", type=click.Choice(["mv", "mvu", "tm", "perm", "uniform"]),
              required=True)
@click.option("--v", "v", type=int, default=1, help="Derangements in M(v).")
@click.option("--u", "u", type=float, default=0.0, help="Uniform share in M(v, u).")
@click.option("--flows", type=int, default=64, help="Flows per node (tm).")
@click.option("--tl", type=float, default=0.2, help="Fraction of large flows (tm).")
@click.option("--cl", type=float, default=0.7, help="Load share of large flows (tm).")
@click.option("--noise", type=float, default=0.01, help="Relative weight noise (tm).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@common
def gen(family, v, u, flows, tl, cl, noise, out, n, rate, rb, rr, eta, delta, eps, seed,
        repeats, quantize, literal, as_json):
    """Write a demand matrix as CSV."""
    if family == "mv":
        M = make_mv(n, v, seed)
    elif family == "mvu":
        M = make_mvu(n, v, u, seed)
    elif family == "tm":
        M = generate_tm(TmParams(tl, flows, cl, n, noise, seed, literal))
    elif family == "perm":
        M = make_perm(n, seed)
    else:
        M = make_uniform(n)
    if out:
        save_csv(M, out)
        m = metrics(M)
        emit({"path": out, "n": n, "weight": m.weight, "max_entry": m.max_entry,
              "sparsity": m.sparsity, "variation_distance": m.variation_distance}, as_json)
    else:
        click.echo(to_csv_text(M), nl=False)


@main.command("decompose")
@click.argument("matrix", type=click.Path(exists=True, dir_okay=False))
@click.option("--strategy", type=click.Choice(["max-bottleneck", "min-greedy"]),
              default="max-bottleneck")
@common
def decompose_cmd(matrix, strategy, n, rate, rb, rr, eta, delta, eps, seed, repeats,
                  quantize, literal, as_json):
    """Print the BvN epsilon-decomposition of MATRIX as JSON."""
    d = decompose(load_csv(matrix), eps, strategy)
    click.echo(d.to_json())


def _report(M, S, T, cfg, claimed=None, label=None) -> tuple[dict, bool]:
    feas = verify_feasible(S, T, cfg.r)
    complete = verify_complete(M, T)
    eps_ok = verify_epsilon(M, T, cfg.eps)
    dct = completion_time(S)
    rep = {"system": label, "n": int(M.shape[0]), "slots": len(S), "dct": dct}
    if claimed is not None:
        rep["claimed_dct"] = claimed
    rep.update({
        "throughput": analytics.throughput(dct) if dct > 0 else None,
        "feasible": feas.ok,
        "violated_property": feas.prop,
        "violation": feas.detail or None,
        "complete": complete,
        "epsilon_complete": eps_ok,
        "skewness": skewness(T) if len(S) else None,
    })
    return rep, feas.ok and (complete or eps_ok)


@main.command()
@click.argument("system", type=click.Choice(SYSTEMS))
@click.argument("matrix", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the schedule JSON here.")
@common
def schedule(system, matrix, out, n, rate, rb, rr, eta, delta, eps, seed, repeats,
             quantize, literal, as_json):
    """Schedule MATRIX with SYSTEM, verify the result and report its DCT."""
    cfg = make_config(rate, rb, rr, eta, delta, eps, quantize)
    M = load_csv(matrix)
    res = run(system, M, cfg)
    if out:
        Path(out).write_text(dump_schedule(res.topology, res.traffic), encoding="utf-8")
    rep, ok = _report(M, res.topology, res.traffic, cfg, res.claimed_dct, res.label)
    if res.split is not None:
        rep["pivot_index"] = res.split.f
    if res.decomposition is not None:
        v = len(res.decomposition)
        rep["bvn_length"] = v
        rep["bounds"] = {b.source: b.value for b in analytics.bound_reports(
            M.shape[0], float(M.sum()), float(M.max()), v, cfg.R_b, cfg.eta, cfg.r)}
    emit(rep, as_json)
    sys.exit(0 if ok else 1)


@main.command()
@click.argument("matrix", type=click.Path(exists=True, dir_okay=False))
@click.argument("schedule_path", metavar="SCHEDULE", type=click.Path(exists=True, dir_okay=False))
@common
def verify(matrix, schedule_path, n, rate, rb, rr, eta, delta, eps, seed, repeats,
           quantize, literal, as_json):
    """Check a schedule JSON against MATRIX."""
    cfg = make_config(rate, rb, rr, eta, delta, eps, quantize)
    M = load_csv(matrix)
    S, T = load_schedule(Path(schedule_path).read_text(encoding="utf-8"))
    if S.n != M.shape[0]:
        raise BadInput("schedule and matrix sizes differ")
    rep, ok = _report(M, S, T, cfg)
    del rep["system"]
    rep["result"] = "pass" if ok else "fail"
    emit(rep, as_json)
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--out-dir", type=click.Path(file_okay=False), default=".")
@common
def fixture(out_dir, n, rate, rb, rr, eta, delta, eps, seed, repeats, quantize, literal,
            as_json):
    """Write the 5-node M(2) matrix and its two-cycle schedule."""
    M, S, T = ring_m2_schedule()
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    save_csv(M, d / "ring5.csv")
    (d / "ring5_schedule.json").write_text(dump_schedule(S, T), encoding="utf-8")
    emit({"matrix": str(d / "ring5.csv"), "schedule": str(d / "ring5_schedule.json"),
          "dct": completion_time(S)}, as_json)


@main.command()
@common
def bounds(n, rate, rb, rr, eta, delta, eps, seed, repeats, quantize, literal, as_json):
    """Worst-case DCT of each system over M(v, u) and the derived ratios."""
    cfg = make_config(rate, rb, rr, eta, delta, eps, quantize)
    R_b = cfg.R_b
    out = {"n": n, "R_b": R_b, "eta": cfg.eta, "r": cfg.r}
    for s in ("bvn", "rr", "comp"):
        v, u, val = analytics.system_dct_mvu(s, n, R_b, cfg.eta, cfg.r)
        out[f"{s}_dct"] = val
        out[f"{s}_worst_v"] = v
    if R_b > 0:
        out["psi"] = analytics.psi(n, R_b, cfg.eta, cfg.r)
        out["v_ddot"] = analytics.v_ddot(n, R_b, cfg.eta, cfg.r)
        out["low_crossing"] = analytics.low_crossing(R_b, n)
    emit(out, as_json)


@main.command()
@click.argument("experiment", type=click.Choice(EXPERIMENTS))
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="CSV path (default stdout).")
@common
def sweep(experiment, out, n, rate, rb, rr, eta, delta, eps, seed, repeats, quantize,
          literal, as_json):
    """Run a throughput sweep and write one CSV row per (x, system)."""
    if delta is not None:
        raise BadInput("sweeps size rr slots per schedule; drop --delta")
    cfg = make_config(rate, rb, rr, eta, delta, eps, quantize)
    spec = SweepSpec(experiment, n=n, R_b=rb, eta=cfg.eta, r=cfg.r, repeats=repeats,
                     seed=seed, eps=eps, literal=literal)

    def progress(k, x):
        click.echo(f"{experiment}: x={x} done", err=True)

    text = rows_to_csv(run_sweep(spec, progress))
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
