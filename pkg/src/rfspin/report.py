"""Task dispatch and report emission (JSON and CSV)."""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path

import numpy as np

from . import interpolation, largen
from .config import ExperimentConfig, canonical_json
from .correlators import PositionSpin, position_spins
from .engines import Mcmc, mcmc_estimate
from .inequalities import HOLDS, INCONCLUSIVE, VIOLATED, check_schwartz_soffer, check_theorem_chain, judge
from .lattice import Lattice
from .model import disorder_batch

COMPLETED = "COMPLETED"
EXIT_CODES = {HOLDS: 0, COMPLETED: 0, VIOLATED: 2, INCONCLUSIVE: 3}


def _clean(x):
    """JSON-safe plain Python values; non-finite floats become ``None``."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    return x


def _inequality_result(rep, table_members=("lhs", "mid", "rhs")):
    rows = [{"member": m, "value": v, "stderr": e} for m, v, e in zip(table_members, rep.chain, rep.stderr)]
    return {
        "values": rep.chain, "errors": rep.stderr, "margins_sigma": rep.margins_sigma, "verdict": rep.verdict,
        "metadata": dict(rep.metadata, diff_stderr=rep.diff_stderr), "table": rows,
    }


def _run_check_ss(cfg, workers):
    t = cfg.data["task"]
    rep = check_schwartz_soffer(cfg.engine(), cfg.averager(), t.get("q", [1]), int(t.get("m", 0)), int(t.get("n", 0)),
                                workers=workers)
    return _inequality_result(rep)


def _run_check_theorem(cfg, workers):
    t = cfg.data["task"]
    rep = check_theorem_chain(cfg.engine(), cfg.averager(), int(t["k"]), int(t["l"]), cfg.observables(),
                              workers=workers, basis=t.get("basis", "position"))
    return _inequality_result(rep)


def _run_gamma_path(cfg, workers):
    t = cfg.data["task"]
    path = interpolation.gamma_path(cfg.engine(), cfg.t_grid(), cfg.observables(), cfg.inner(), cfg.averager(),
                                    workers=workers, fd_step=t.get("fd_step"))
    diffs = list(path.increments) + list(path.curvature)
    errs = list(path.increments_stderr) + list(path.curvature_stderr)
    margins, verdict = judge(diffs, errs, cfg.averager().stochastic, float(np.max(np.abs(path.gamma), initial=0.0)))
    rows = [
        {"t": a, "gamma": b, "stderr": c, "dgamma_lemma1": d, "dgamma_stderr": e}
        for a, b, c, d, e in zip(path.t, path.gamma, path.stderr, path.dgamma, path.dstderr)
    ]
    meta = {
        "t": path.t, "dgamma": path.dgamma, "dgamma_stderr": path.dstderr, "inner_bias": path.bias,
        "monotone_margins_sigma": margins[: len(path.increments)],
        "convex_margins_sigma": margins[len(path.increments):],
        "fd_t": path.fd_t, "fd_step": path.fd_step, "fd_minus_derivative": -path.fd_diff, "fd_stderr": path.fd_stderr,
    }
    return {"values": path.gamma, "errors": path.stderr, "margins_sigma": margins, "verdict": verdict,
            "metadata": meta, "table": rows,
            "csv_header": ["t", "gamma", "stderr", "dgamma_lemma1", "stderr"]}


def _run_lemma2(cfg, workers):
    t = cfg.data["task"]
    rep = interpolation.check_lemma2(cfg.engine(), float(t["t1"]), float(t["t2"]), int(t["j"]), int(t["l"]),
                                     cfg.observables(), cfg.inner(), cfg.averager(), workers=workers)
    res = _inequality_result(rep)
    res["values"], res["errors"] = [rep.lhs, rep.rhs], [rep.stderr[0], rep.stderr[2]]
    res["margins_sigma"] = [m for m in rep.margins_sigma if m is not None] if cfg.averager().stochastic else [None]
    res["table"] = [res["table"][0], res["table"][2]]
    return res


def _run_largen(cfg, workers):
    t = cfg.data["task"]
    rep = largen.exponents_and_checks(float(t["d"]), int(t["N"]), float(t["betaDeltaG"]), cfg.q_grid())
    failed = [c for c in rep.checks if c["role"] == "check" and not c["pass"]]
    if any(not c.get("breakdown") for c in failed):
        verdict = VIOLATED
    elif failed:
        verdict = INCONCLUSIVE
    else:
        verdict = HOLDS
    ex = rep.exponents.to_dict()
    rows = [{"name": c["name"], "q": c.get("q"), "lhs": c["lhs"], "rhs": c["rhs"], "pass": c["pass"],
             "role": c["role"], "breakdown": c.get("breakdown", False)} for c in rep.checks]
    return {"values": [ex["eta"], ex["etaBar"], ex["etaPrime"]], "errors": [0.0, 0.0, 0.0], "margins_sigma": [],
            "verdict": verdict, "input": rep.input, "coefficients": rep.coefficients, "exponents": ex,
            "checks": rep.checks, "table": rows}


def _run_saddle(cfg, workers):
    t = cfg.data["task"]
    lat = Lattice(int(t["d"]), int(t["L"]))
    sol = largen.solve_saddle(float(t["beta"]), float(t["betaDeltaG"]), lat, bool(t.get("exclude_zero_mode", False)))
    row = {"beta": sol.beta, "betaDeltaG": sol.beta_delta, "m2": sol.m2, "residual": sol.residual}
    return {"values": [sol.m2], "errors": [0.0], "margins_sigma": [], "verdict": COMPLETED,
            "metadata": {"residual": sol.residual, "d": lat.d, "L": lat.L}, "table": [row]}


def _run_simulate(cfg, workers):
    """Site means of one disorder sample (index ``task.sample``)."""
    eng = cfg.engine()
    lat, N = eng.lattice, eng.N
    dis = cfg.data["disorder"]
    i = int(cfg.data["task"].get("sample", 0))
    g = disorder_batch(lat.volume, N, int(dis.get("base_seed", 0)), np.array([i]))
    if isinstance(eng, Mcmc):
        obs = [PositionSpin(x, n) for x in range(lat.volume) for n in range(N)]
        est = mcmc_estimate(eng, g[0], obs)
        means, errs = est.values.real, est.stderr
        meta = {"acceptance": est.acceptance, "tau_int": est.tau_int}
    else:
        state = eng.gibbs(g, ids=np.array([i]))
        means = np.real(state.cumulant([position_spins(lat, N)])[0].reshape(-1))
        errs = np.zeros_like(means)
        meta = {}
    rows = [{"site": k // N, "component": k % N, "mean": m, "stderr": e} for k, (m, e) in enumerate(zip(means, errs))]
    meta["sample"] = i
    return {"values": means, "errors": errs, "margins_sigma": [], "verdict": COMPLETED, "metadata": meta, "table": rows}


RUNNERS = {
    "check-ss": _run_check_ss,
    "check-theorem": _run_check_theorem,
    "gamma-path": _run_gamma_path,
    "lemma2": _run_lemma2,
    "largen": _run_largen,
    "saddle": _run_saddle,
    "simulate": _run_simulate,
}


def run_task(cfg: ExperimentConfig, workers: int = 1) -> dict:
    return RUNNERS[cfg.task](cfg, workers)


def build_report(cfg: ExperimentConfig, result: dict) -> dict:
    """The JSON document; an empty result yields ``values: []`` and an inconclusive verdict."""
    values = result.get("values", [])
    doc = {
        "task": cfg.task,
        "config_digest": cfg.digest,
        "config": cfg.data,
        "seeds": cfg.seeds(),
        "values": values,
        "errors": result.get("errors", []),
        "margins_sigma": result.get("margins_sigma", []),
        "verdict": result.get("verdict", INCONCLUSIVE) if len(values) else INCONCLUSIVE,
    }
    for key in ("metadata", "input", "coefficients", "exponents", "checks"):
        if key in result:
            doc[key] = result[key]
    return _clean(doc)


def _csv_text(rows, header=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if rows:
        keys = list(rows[0].keys())
        w.writerow(header or keys)
        for r in rows:
            w.writerow(["" if r[k] is None else repr(float(r[k])) if isinstance(r[k], (float, np.floating)) else r[k]
                        for k in keys])
    elif header:
        w.writerow(header)
    return buf.getvalue()


def emit_report(cfg: ExperimentConfig, result: dict, out_dir, fmt: str = "json") -> list:
    """Write ``<task>.json`` and, for ``fmt="csv"``, ``<task>.csv``; return the written paths."""
    if fmt not in ("json", "csv"):
        raise ValueError(f"format must be json or csv, got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.task.replace("-", "_")
    doc = build_report(cfg, result)
    paths = [out / f"{stem}.json"]
    paths[0].write_text(canonical_json(doc), encoding="utf-8")
    if fmt == "csv":
        p = out / f"{stem}.csv"
        p.write_text(_csv_text(result.get("table", []), result.get("csv_header")), encoding="utf-8")
        paths.append(p)
    return paths


def default_out_dir() -> str:
    return os.environ.get("RFSPIN_OUT", ".")
