"""Command-line interface.

Subcommands: spectrum, table1, protocol, sweep, dfs-check. Scenario-driven
commands read a JSON document (see scenario module docstring). Output is
CSV (default) or JSON via --format; CSV carries provenance as '# formula:'
comment lines so every number can be traced to the expression that
produced it.

Exit codes: 0 success; 2 malformed scenario or usage; 3 infeasible request
(no protected signal, insufficient time, unreachable target, oversize
enumeration); 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bayes import GaussianPrior
from .config import DEFAULT_TOLERANCES
from .control import EffectiveSpectrum, enumerate_dfs_configs
from .errors import (Degenerate, InsufficientTime, InvalidState,
                     NoSignalComponent, NotLinear, NumericFailure,
                     ScenarioError, TooLarge, Unreachable)
from .montecarlo import dephase_coherence, mc_dephase_check
from .placement import table_rows
from .protocols import (ProtocolReport, fixed_time_single_shot, ghz_reduction,
                        single_shot_flat)
from .scenario import build_scenario, load_scenario, run_scenario

_INFEASIBLE = (NoSignalComponent, InsufficientTime, Unreachable, TooLarge,
               Degenerate, NotLinear, ValueError)
_NUMERIC = (NumericFailure, InvalidState)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _emit(payload: dict, args) -> None:
    """payload: {"comments": [...], "rows": [...], "meta": {...}} or
    {"report": {...}} for protocol output."""
    if args.format == "json":
        def coerce(o):
            if isinstance(o, np.integer):
                return int(o)
            if isinstance(o, np.floating):
                return float(o)
            if isinstance(o, np.ndarray):
                return o.tolist()
            return str(o)
        text = json.dumps(payload, indent=2, default=coerce)
    else:
        lines = [f"# {c}" for c in payload.get("comments", [])]
        for k, v in payload.get("meta", {}).items():
            lines.append(f"# {k}: {_fmt(v)}")
        rows = payload.get("rows", [])
        if rows:
            cols = list(rows[0].keys())
            lines.append(",".join(cols))
            for r in rows:
                lines.append(",".join(_fmt(r[c]) for c in cols))
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _require_scenario(args):
    if not args.scenario:
        raise ScenarioError("this command needs --scenario PATH")
    return load_scenario(args.scenario)


def _grid(spec: str) -> tuple[float, float, int]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be start:stop:count")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e
    if n < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    return a, b, n


def _uniform_spectrum(L: int, delta: float) -> EffectiveSpectrum:
    lo = -delta / 2.0
    gap = delta / (L - 1)
    return EffectiveSpectrum(tuple(lo + k * gap for k in range(L)))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_spectrum(args) -> dict:
    sc = _require_scenario(args)
    built = build_scenario(sc)
    sp = built.spectrum
    rows = []
    for i, v in enumerate(sp.levels):
        row = {"level_index": i, "eigenvalue": float(v)}
        if sp.configs is not None:
            row["config"] = ";".join(_fmt(float(x)) for x in
                                     np.asarray(sp.configs[i], dtype=float))
        else:
            row["config"] = ""
        rows.append(row)
    meta = {"L": sp.L, "Delta": float(sp.Delta), "min_gap": float(sp.delta),
            "linear": sp.is_linear()}
    comments = ["formula: eigenvalue = signal . config over protected "
                "configurations"]
    return {"comments": comments, "meta": meta, "rows": rows}


def cmd_table1(args) -> dict:
    sizes = tuple(int(s) for s in args.sizes.split(",")) if args.sizes \
        else (4, 6, 8, 10, 12, 14, 16)
    rows = []
    for r in table_rows(sizes):
        rows.append({
            "family": r["family"], "N": r["N"],
            "range": float(r["range"]), "levels": r["levels"],
            "enum_range": float(r["enum_range"]),
            "enum_levels": r["enum_levels"],
            "gap": float(r["gap"]),
        })
    comments = [
        "formula: two_point range = N (conventional units), levels = N/2",
        "formula: linear range = N^2/(4(N-1)), levels = N^2/4",
        "formula: exponential range = 2(1 - 2^(-N/2)), levels = 2^(N/2)",
        "enum_* columns re-derive range and level count by brute force "
        "over each family's protected domain",
    ]
    return {"comments": comments, "meta": {}, "rows": rows}


def _report_payload(report: ProtocolReport, built) -> dict:
    comments = [f"formula: {p.label} = {p.formula}" for p in report.predictions]
    meta = {"protocol": report.kind, "L": built.spectrum.L,
            "Delta": float(built.spectrum.Delta)}
    for k, v in report.resources.items():
        meta[f"resource_{k}"] = v
    if report.regime:
        meta["regime"] = report.regime
    if report.recommendation:
        meta["recommendation"] = report.recommendation
    rows = [{"label": p.label, "value": p.value, "formula": p.formula}
            for p in report.predictions]
    if report.simulation is not None:
        s = report.simulation
        for key, val in s.to_dict().items():
            if key in ("kind",):
                continue
            rows.append({"label": f"sim_{key}", "value": val,
                         "formula": "monte carlo"})
    if report.schedule is not None:
        for k, (t, w) in enumerate(report.schedule, start=1):
            rows.append({"label": f"round_{k}", "value": t,
                         "formula": f"width after round = {_fmt(w)}"})
    return {"comments": comments, "meta": meta, "rows": rows,
            "report": report.to_dict()}


def cmd_protocol(args) -> dict:
    sc = _require_scenario(args)
    built = build_scenario(sc)
    report = run_scenario(built, simulate=args.simulate, trials=args.trials,
                          seed=args.seed)
    payload = _report_payload(report, built)
    if args.format == "json":
        return {"meta": payload["meta"], "report": payload["report"]}
    payload.pop("report")
    return payload


def _sweep_t(built, grid) -> dict:
    sc = built.scenario
    if sc.protocol.kind != "fixed_time":
        raise ScenarioError("axis t requires a fixed_time protocol",
                            "protocol.kind")
    prior = GaussianPrior(sc.prior.width, sc.prior.mean)
    rows = []
    for t in np.linspace(*grid):
        rep = fixed_time_single_shot(built.spectrum, prior, float(t))
        row = {"t": float(t), "x": rep.resources["x"],
               "regime": rep.regime,
               "variance_reduction": rep.prediction("variance_reduction"),
               "extremal_closed_form": ghz_reduction(rep.resources["x"]),
               "probe": rep.resources["probe"]}
        rows.append(row)
    comments = ["formula: variance_reduction = 1 - W0^2 F(rho_bar)",
                "formula: extremal_closed_form = 1 - x^2 exp(-x^2), "
                "x = t W0 Delta"]
    return {"comments": comments, "meta": {"axis": "t"}, "rows": rows}


def _int_grid(grid, minimum: int) -> list[int]:
    a, b, n = grid
    vals = sorted({int(round(v)) for v in np.linspace(a, b, n)})
    vals = [v for v in vals if v >= minimum]
    if not vals:
        raise ScenarioError(f"grid contains no integers >= {minimum}")
    return vals


def _sweep_L(built, grid) -> dict:
    sc = built.scenario
    base = built.spectrum
    per_level = float(base.Delta) / base.L  # hold Delta/L fixed
    rows = []
    for L in _int_grid(grid, 2):
        sp = _uniform_spectrum(L, per_level * L)
        if sc.protocol.kind == "fixed_time":
            prior = GaussianPrior(sc.prior.width, sc.prior.mean)
            rep = fixed_time_single_shot(sp, prior, sc.protocol.t)
            rows.append({"L": L, "Delta": float(sp.Delta),
                         "x": rep.resources["x"], "regime": rep.regime,
                         "variance_reduction":
                             rep.prediction("variance_reduction")})
        else:
            rep = single_shot_flat(sp, sc.prior.width, sc.prior.lower)
            rows.append({"L": L, "Delta": float(sp.Delta),
                         "t1": rep.resources["t1"],
                         "predicted_mse": rep.prediction("predicted_mse"),
                         "asymptotic_mse": rep.prediction("asymptotic_mse"),
                         "holevo_mse": rep.prediction("holevo_mse")})
    comments = ["axis L holds Delta/L fixed at the base spectrum's value",
                "formula: predicted_mse = W0^2/(4 (L-1)^2)",
                "formula: asymptotic_mse = W0^2/(4 L^2)",
                "formula: holevo_mse = (W0/(2 pi))^2 tan^2(pi/(L+1))"]
    return {"comments": comments,
            "meta": {"axis": "L", "Delta_per_level": per_level}, "rows": rows}


def _sweep_Delta(built, grid) -> dict:
    sc = built.scenario
    L = built.spectrum.L
    rows = []
    for d in np.linspace(*grid):
        if d <= 0:
            raise ScenarioError("Delta grid must be positive")
        sp = _uniform_spectrum(L, float(d))
        if sc.protocol.kind == "fixed_time":
            prior = GaussianPrior(sc.prior.width, sc.prior.mean)
            rep = fixed_time_single_shot(sp, prior, sc.protocol.t)
            rows.append({"Delta": float(d), "x": rep.resources["x"],
                         "regime": rep.regime,
                         "variance_reduction":
                             rep.prediction("variance_reduction")})
        else:
            rep = single_shot_flat(sp, sc.prior.width, sc.prior.lower)
            rows.append({"Delta": float(d), "t1": rep.resources["t1"],
                         "predicted_mse": rep.prediction("predicted_mse"),
                         "holevo_mse": rep.prediction("holevo_mse")})
    comments = ["axis Delta holds L fixed; precision predictions depend on "
                "L only, while t1 = 2 pi (L-1)/(W0 Delta) trades range for "
                "time",
                "formula: t1 = 2 pi (L-1)/(W0 Delta)"]
    return {"comments": comments, "meta": {"axis": "Delta", "L": L},
            "rows": rows}


def _sweep_N(grid) -> dict:
    Ns = [n for n in _int_grid(grid, 4) if n % 2 == 0]
    if not Ns:
        raise ScenarioError("axis N needs even integers >= 4 in the grid")
    rows = []
    for r in table_rows(tuple(Ns)):
        rows.append({"family": r["family"], "N": r["N"],
                     "range": float(r["range"]), "levels": r["levels"],
                     "gap": float(r["gap"])})
    comments = ["formula: ranges and level counts as in table1"]
    return {"comments": comments, "meta": {"axis": "N"}, "rows": rows}


def cmd_sweep(args) -> dict:
    if args.axis == "N":
        return _sweep_N(args.grid)
    sc = _require_scenario(args)
    built = build_scenario(sc)
    if args.axis == "t":
        return _sweep_t(built, args.grid)
    if args.axis == "L":
        return _sweep_L(built, args.grid)
    if args.axis == "Delta":
        return _sweep_Delta(built, args.grid)
    raise ScenarioError(f"unknown axis {args.axis!r}")


def cmd_dfs_check(args) -> dict:
    sc = _require_scenario(args)
    built = build_scenario(sc)
    if built.channel is None:
        raise ValueError("scenario declares no noise channels to check")
    configs = built.spectrum.configs
    if configs is None:
        configs = tuple(enumerate_dfs_configs(built.array, built.noise,
                                              f_perp=built.f_perp))
    if len(configs) < 2:
        raise ValueError("fewer than two protected configurations")
    trials = args.trials if args.trials is not None else sc.trials
    if trials < 1:
        raise ValueError("trials must be positive")
    seed = args.seed if args.seed is not None else sc.seed
    pairs = [(i, i + 1) for i in range(min(len(configs) - 1, 20))]
    if (0, len(configs) - 1) not in pairs and len(configs) > 2:
        pairs.append((0, len(configs) - 1))
    rows = []
    for k, (i, j) in enumerate(pairs):
        a, b = configs[i], configs[j]
        chk = mc_dephase_check(built.channel, a, b, trials=trials,
                               seed=seed + k)
        rows.append({"pair": f"{i}-{j}", "protected": True,
                     "analytic": chk.analytic, "empirical": chk.empirical,
                     "stderr": chk.stderr, "z": chk.z_score})
    # contrast row: perturb one site of the first configuration off the
    # protected class, if the site ladder allows it
    contrast = _contrast_config(built, configs[0])
    if contrast is not None:
        chk = mc_dephase_check(built.channel, configs[0], contrast,
                               trials=trials, seed=seed + len(pairs))
        rows.append({"pair": "contrast", "protected": False,
                     "analytic": chk.analytic, "empirical": chk.empirical,
                     "stderr": chk.stderr, "z": chk.z_score})
    comments = [
        "formula: analytic = prod_k E[exp(i chi_k f_k . (a - b))]",
        "protected pairs must show damping exactly 1; the contrast row "
        "leaves the protected class and should damp below 1",
    ]
    meta = {"trials": trials, "seed": seed,
            "channels": len(built.channel.fields)}
    return {"comments": comments, "meta": meta, "rows": rows}


def _contrast_config(built, anchor):
    """A configuration one step off the protected class, or None."""
    base = list(np.asarray(anchor, dtype=float))
    for j in range(built.array.J):
        for v in built.array.site_spin_values(j):
            cand = list(base)
            cand[j] = float(v)
            if cand == base:
                continue
            damp = dephase_coherence(built.channel, base, cand)
            if damp < 1.0:
                return tuple(cand)
    return None


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dfs-sense",
        description="Decoherence-free probe construction and Bayesian "
                    "precision analysis for distributed field sensing.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_scenario=True):
        p.add_argument("--scenario", default=None,
                       help="path to a scenario JSON document"
                            + ("" if needs_scenario else " (unused)"))
        p.add_argument("--simulate", action="store_true",
                       help="attach Monte-Carlo trials to the report")
        p.add_argument("--trials", type=int, default=None,
                       help="override the scenario's trial count")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario's seed")
        p.add_argument("--out", default=None, help="write output to a file")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("spectrum", help="protected configurations and the "
                                        "effective level ladder")
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("table1", help="placement family scaling table")
    common(p, needs_scenario=False)
    p.add_argument("--sizes", default=None,
                   help="comma-separated even N values (default 4..16)")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("protocol", help="plan a protocol and report "
                                        "predicted precision")
    common(p)
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("sweep", help="tabulate precision along one axis")
    common(p)
    p.add_argument("--axis", required=True, choices=("t", "L", "Delta", "N"))
    p.add_argument("--grid", required=True, type=_grid,
                   help="start:stop:count")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dfs-check", help="verify coherence protection "
                                         "against the noise model")
    common(p)
    p.set_defaults(func=cmd_dfs_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        payload = args.func(args)
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 2
    except _INFEASIBLE as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 3
    except _NUMERIC as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 4
    _emit(payload, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
