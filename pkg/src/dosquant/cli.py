"""Command-line entry point: ``dosquant <subcommand> ...``.

Exit codes: 0 success, 1 saturation, invariant violation or violated
certificate, 2 invalid input or infeasible scenario, 3 a ``--strict`` run
exercised an interpretation heuristic.
"""

import argparse
import concurrent.futures
import dataclasses
import json
import math
import os
import sys
from importlib import resources

from . import attack as attack_mod
from . import cert
from . import switching as switching_mod
from .attack import AttackParams
from .constants import DESCRIPTIONS, derive_strategy1, jsonable
from .errors import DosQuantError
from .plant import PER_MODE, PER_PAIR
from .sim import (build_model, certificate_params, child_seeds, derive_constants,
                  load_scenario, read_trace, realize, replay_invariants, run)
from .svg import line_plot

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_STRICT = 0, 1, 2, 3

# Interpretation choices a --strict invocation refuses to rely on silently.
HEURISTICS = {
    "held_input": "passive loops hold the decoded sample as the control input",
    "natural_log": "mixed-base logarithms in the S2 conditions are all natural",
    "b_literal": "the S1 contraction b is evaluated from its closed form",
    "corollary_tau_D": "attack frequency bound read in its relaxing direction",
    "blackout_replay": "the decoder rebuilt missed range updates after a blackout",
}

_STRATEGY_HEURISTICS = {
    "S1": ["b_literal"], "S1-Corollary": ["corollary_tau_D"], "S2": ["natural_log"],
    "S3": ["held_input"], "S4-TT": ["held_input"], "S4-ET": ["held_input"],
}


def bundled_scenarios():
    """Paths of the scenario files shipped with the package."""
    root = resources.files("dosquant") / "scenarios"
    return sorted(str(p) for p in root.iterdir() if p.name.endswith(".json"))


def resolve(path):
    """A scenario path, or the name of a bundled scenario such as ``ex_a_s1``."""
    if os.path.exists(path):
        return path
    for candidate in bundled_scenarios():
        if os.path.splitext(os.path.basename(candidate))[0] == path:
            return candidate
    return path


def _finite(obj):
    """Replace non-finite floats by the strings "inf", "-inf" and "nan" (strict JSON)."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _write_json(obj, path):
    text = json.dumps(_finite(jsonable(obj)), indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)


def _load(path, seed=None, horizon=None):
    sc, doc = load_scenario(resolve(path))
    changes = {}
    if seed is not None:
        changes["seed"] = int(seed)
    if horizon is not None:
        changes["horizon"] = float(horizon)
    if changes:
        sc = dataclasses.replace(sc, **changes)
    return sc, doc


def _certificate(sc, doc, model, consts):
    return cert.check(sc.strategy, consts, certificate_params(doc))


# ------------------------------------------------------------ run

def _plots(result, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    cols = {name: i for i, name in enumerate(result.columns)}
    t = [r[cols["t"]] for r in result.rows]
    bands = [(h, h + d) for h, d in result.trace.intervals]
    nx = result.scenario.plant.nx
    states = [(f"x{i + 1}", [r[cols[f"x{i + 1}"]] for r in result.rows]) for i in range(nx)]
    files = {
        "states.svg": line_plot(t, states, "state", "x", bands=bands),
        "ranges.svg": line_plot(t, [("E_enc", list(result.E_enc)), ("E_dec", list(result.E_dec)),
                                    ("|x - center|", list(result.offset_norm))],
                                "quantizer range", "log10", log=True, bands=bands),
        "modes.svg": line_plot(t, [("mode", [r[cols["mode"]] for r in result.rows]),
                                   ("mode_hat", [r[cols["mode_hat"]] for r in result.rows])],
                               "plant and controller modes (shaded: attacks)", "mode",
                               step=True, bands=bands),
    }
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)


def run_one(path, out_dir, seed=None, horizon=None, plots=True, certify=False, strict=False):
    """Run one scenario file and write its outputs; returns (exit code, summary)."""
    sc, doc = _load(path, seed, horizon)
    model = build_model(sc)
    consts = derive_constants(sc, model)
    certificate = _certificate(sc, doc, model, consts)
    if certify and not certificate.verdict:
        summary = {"name": sc.name, "status": "uncertified",
                   "binding": certificate.binding, "seed": sc.seed}
        if out_dir:
            _write_json(summary, os.path.join(out_dir, "summary.json"))
        return EXIT_FAIL, summary
    result = run(sc, model, consts)
    summary = dict(result.summary)
    a_seed, s_seed = child_seeds(sc.seed)
    summary["attack_seed"], summary["switching_seed"] = a_seed, s_seed
    summary["certificate"] = {"verdict": "satisfied" if certificate.verdict else "violated",
                              "binding": certificate.binding}
    summary["invariants"] = {k: len(v) for k, v in
                             replay_invariants(result.columns, result.rows).items()}
    used = list(_STRATEGY_HEURISTICS.get(sc.strategy, []))
    if summary["replays"]:
        used.append("blackout_replay")
    summary["heuristics"] = used
    failed = (summary["status"] != "ok" or summary["range_violations"]
              or summary["uniformity_violations"] or summary["replay_mismatches"]
              or any(summary["invariants"].values()))
    summary["exit_code"] = EXIT_FAIL if failed else (EXIT_STRICT if strict and used else EXIT_OK)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "trace.csv"), "w", newline="") as fh:
            fh.write(result.trace_csv())
        _write_json(summary, os.path.join(out_dir, "summary.json"))
        _write_json(result.events, os.path.join(out_dir, "events.json"))
        attack_mod.write_csv(result.trace, os.path.join(out_dir, "attack.csv"))
        switching_mod.write_csv(result.signal, os.path.join(out_dir, "switching.csv"))
        if plots and result.rows:
            _plots(result, os.path.join(out_dir, "plots"))
    return summary["exit_code"], summary


def _run_job(args):
    path, out_dir, kw = args
    try:
        return path, run_one(path, out_dir, **kw), None
    except DosQuantError as exc:
        return path, (EXIT_INPUT, None), str(exc)


def cmd_run(a):
    kw = {"seed": a.seed, "horizon": a.horizon, "plots": not a.no_plots,
          "certify": a.certify, "strict": a.strict}
    a.scenario = resolve(a.scenario)
    if os.path.isdir(a.scenario):
        paths = sorted(os.path.join(a.scenario, f) for f in os.listdir(a.scenario)
                       if f.endswith(".json"))
        jobs = [(p, os.path.join(a.out, os.path.splitext(os.path.basename(p))[0]), kw)
                for p in paths]
    else:
        jobs = [(a.scenario, a.out, kw)]
    if a.jobs > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(a.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    codes = []
    for path, (rc, summary), err in results:
        if err:
            print(f"error: {path}: {err}", file=sys.stderr)
        else:
            print(f"{path}: status={summary['status']} exit={rc} "
                  f"final={summary.get('final_norm', math.nan):.3g}")
        codes.append(rc)
    # a failed run outranks input errors, which outrank strict-mode refusals
    for rc in (EXIT_FAIL, EXIT_INPUT, EXIT_STRICT):
        if rc in codes:
            return rc
    return EXIT_OK


# ------------------------------------------------------------ other commands

def cmd_check(a):
    sc, doc = _load(a.scenario)
    model = build_model(sc)
    consts = derive_constants(sc, model)
    c = _certificate(sc, doc, model, consts)
    report = c.to_dict()
    report["scenario"] = sc.name
    report["heuristics"] = _STRATEGY_HEURISTICS.get(sc.strategy, [])
    _write_json(report, a.out)
    if not c.verdict:
        return EXIT_FAIL
    return EXIT_STRICT if a.strict and report["heuristics"] else EXIT_OK


def cmd_derive(a):
    sc, doc = _load(a.scenario)
    model = build_model(sc)
    consts = derive_constants(sc, model)
    params = certificate_params(doc)
    if sc.strategy in ("S1", "S1-Corollary") and isinstance(sc.attack, AttackParams) \
            and "tau_d" in params:
        consts = derive_strategy1(model, sc.N, sc.N_max, sc.attack, params["tau_d"])
    values = consts.to_dict()
    f = model.fits
    fits = {name: jsonable(getattr(f, name)) for name in PER_MODE + PER_PAIR}
    doc_out = {
        "scenario": sc.name, "strategy": sc.strategy, "tau_s": model.tau_s,
        "constants": values,
        "descriptions": {k: DESCRIPTIONS[k] for k in values if k in DESCRIPTIONS},
        "fits": fits,
        "fit_source": {k: f.source.get(k, "derived") for k in fits},
    }
    _write_json(doc_out, a.out)
    return EXIT_OK


def _realized(a):
    sc, _ = _load(a.scenario, a.seed, a.horizon)
    steps = int(math.floor(sc.horizon / sc.plant.tau_s + 1e-9))
    return realize(sc, steps)


def cmd_gen_attack(a):
    trace, _, _ = _realized(a)
    if a.out in (None, "-"):
        print("start_s,duration_s")
        for h, d in trace.intervals:
            print(f"{h!r},{d!r}")
    else:
        attack_mod.write_csv(trace, a.out)
    return EXIT_OK


def cmd_gen_switching(a):
    _, signal, _ = _realized(a)
    if a.out in (None, "-"):
        print("time_s,mode")
        for t, q in signal.switches:
            print(f"{t!r},{q + 1}")
    else:
        switching_mod.write_csv(signal, a.out)
    return EXIT_OK


def cmd_replay(a):
    columns, rows = read_trace(a.trace)
    report = replay_invariants(columns, rows)
    out = {"rows": len(rows), "violations": {k: len(v) for k, v in report.items()},
           "rows_flagged": report}
    _write_json(out, a.out)
    return EXIT_FAIL if any(report.values()) else EXIT_OK


def _bounds(items):
    out = {}
    for item in items or []:
        name, _, span = item.partition("=")
        lo, _, hi = span.partition(":")
        out[name] = (float(lo), float(hi))
    return out


DEFAULT_BOUNDS = {"N": (3, 10001), "tau_d": (1e-3, 1e4), "tau_D": (1e-3, 1e4),
                  "T": (1.0 + 1e-6, 1e4)}


def cmd_solve(a):
    sc, doc = _load(a.scenario)
    model = build_model(sc)
    consts = derive_constants(sc, model)
    bounds = dict(DEFAULT_BOUNDS)
    bounds.update(_bounds(a.bounds))
    params = certificate_params(doc)
    for name in a.free:
        params.pop(name, None)
    found = cert.solve_envelope(sc.strategy, consts, params, a.free, bounds)
    _write_json({"scenario": sc.name, "strategy": sc.strategy, "fixed": params,
                 "minimal": found}, a.out)
    return EXIT_OK


# ------------------------------------------------------------ parser

def build_parser():
    ap = argparse.ArgumentParser(prog="dosquant", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario file or a directory of them")
    p.add_argument("scenario", help="scenario JSON file, directory, or bundled scenario name")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--horizon", type=float, help="override the horizon in seconds")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for directories")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when a heuristic interpretation is exercised")
    p.add_argument("--certify", action="store_true",
                   help="refuse to simulate when the certificate is violated")
    p.add_argument("--no-plots", action="store_true", help="skip the SVG plots")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="evaluate the stability certificate")
    p.add_argument("scenario", help="scenario JSON file, directory, or bundled scenario name")
    p.add_argument("--out", help="write the certificate JSON here instead of stdout")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when a heuristic interpretation is exercised")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("derive-constants", help="dump the derived constants table")
    p.add_argument("scenario")
    p.add_argument("--out")
    p.set_defaults(func=cmd_derive)

    for name, func in (("gen-attack", cmd_gen_attack), ("gen-switching", cmd_gen_switching)):
        p = sub.add_parser(name, help=f"write the {name[4:]} realization of a scenario as CSV")
        p.add_argument("scenario")
        p.add_argument("--seed", type=int)
        p.add_argument("--horizon", type=float)
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("replay", help="recheck the invariants of a trace.csv")
    p.add_argument("trace")
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("solve", help="minimal admissible values of free parameters")
    p.add_argument("scenario")
    p.add_argument("--free", action="append", required=True,
                   choices=["N", "tau_d", "tau_D", "T"])
    p.add_argument("--bounds", action="append", metavar="NAME=LO:HI")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DosQuantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
