"""Command-line workbench: spectrum checks, normal forms, rank scans,
realization, and the built-in selftest.

Exit codes: 0 success, 2 hypothesis/precondition failure, 3 numerical
failure (rank or residual), 4 parse error.  Every command is deterministic
given its inputs and --seed; machine blocks embed seed, version and mode.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .engine import (RfdeModel, normal_form, polar_decouple, reduce_to_ode)
from .errors import (HypothesisError, NumericalError, ParseError,
                     PreconditionError)
from .modelio import (jet_payload, load_model, load_target, machine_block,
                      nf_report_csv, nf_report_lines, poly_entries)
from .realize import (DelayTuple, MODE_LEADING, MODE_ODE_REDUCTION, PAIRED,
                      PLAIN, rank_scan, realize_jet, realize_unfolding,
                      sample_delays)
from .selftest import run_selftest
from .spectral import analyze_kernel, verify_hypothesis

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_NUMERICAL = 3
EXIT_PARSE = 4


def _analyze(model, scan_cfg):
    return analyze_kernel(model.kernel, expected_omegas=scan_cfg["omegas"],
                          omega_max=scan_cfg["omega_max"],
                          re_window=scan_cfg["margin_window"])


def cmd_spectrum(args) -> int:
    model, scan_cfg = load_model(args.model)
    data = _analyze(model, scan_cfg)
    report = verify_hypothesis(data, args.rmax)
    print(f"axis spectrum of {args.model}")
    print(f"  p = {data.p}, omegas = "
          + ", ".join(f"{w:.6g}" for w in data.omegas))
    print("  root            Delta'              psi(0) weight")
    for lam, dp, u in zip(data.roots, data.delta_primes, data.psi0):
        print(f"  {lam.real:+.6g}{lam.imag:+.6g}i   "
              f"{dp.real:+.6g}{dp.imag:+.6g}i   "
              f"{u.real:+.6g}{u.imag:+.6g}i")
    print("  dual value along the nilpotent direction: 0 (identity)")
    print(f"  spectral margin in window: {data.margin:.6g}")
    print(f"  hypothesis: {report.summary()}")
    payload = {
        "version": __version__, "command": "spectrum",
        "omegas": list(data.omegas),
        "roots": list(data.roots),
        "delta_primes": list(data.delta_primes),
        "psi0": list(data.psi0),
        "dual_value_nilpotent": 0.0,
        "margin": data.margin,
        "hypothesis": {
            "passed": report.passed,
            "simple_ok": report.simple_ok,
            "min_abs_delta_prime": report.min_abs_delta_prime,
            "nonresonant_ok": report.nonresonant_ok,
            "violation": list(report.violation) if report.violation else None,
            "height": report.resonance_height,
        },
    }
    print(machine_block(payload))
    if not report.passed:
        if report.violation is not None:
            print(f"resonance r={tuple(report.violation)}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_nf(args) -> int:
    model, scan_cfg = load_model(args.model)
    data = _analyze(model, scan_cfg)
    report = verify_hypothesis(data)
    if not report.passed:
        raise HypothesisError(f"spectral hypothesis failed: {report.summary()}")
    order = args.order or model.order
    nf = normal_form(reduce_to_ode(model, data), order)
    polar = polar_decouple(nf)
    lines = nf_report_lines(nf)
    for ln in lines:
        print(ln)
    payload = {
        "version": __version__, "command": "nf", "mode": nf.mode,
        "order": order, "omegas": list(nf.omegas),
        "caveats": nf.caveats(),
        "equivariant": jet_payload(nf.g),
        "radial": jet_payload(polar.radial.terms),
        "angular": jet_payload(polar.angular),
    }
    if args.out:
        with open(args.out + ".txt", "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        with open(args.out + ".csv", "w", encoding="utf-8") as fh:
            fh.write(nf_report_csv(nf))
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(machine_block(payload) + "\n")
        print(f"wrote {args.out}.txt, {args.out}.csv, {args.out}.json")
    else:
        print(machine_block(payload))
    return EXIT_OK


def cmd_rank_scan(args) -> int:
    model, scan_cfg = load_model(args.model)
    data = _analyze(model, scan_cfg)
    order = args.order or model.order
    d = args.delays or (data.p + 1)
    rng = np.random.default_rng(args.seed)
    samples = sample_delays(rng, model.kernel.r, d, args.samples)
    report = rank_scan(data, order, model.s, samples, kind=args.kind)
    csv_text = report.to_csv()
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        print(f"wrote {args.csv}")
    else:
        sys.stdout.write(csv_text)
    summary = {
        "version": __version__, "command": "rank-scan", "seed": args.seed,
        "kind": report.kind, "samples": args.samples, "delays": d,
        "order": order,
        "fraction_surjective": report.fraction_surjective(),
        "fraction_by_degree": {str(deg): report.fraction_surjective(deg)
                               for deg in range(2, order + 1)},
        "min_sigma_surjective": report.min_sigma_surjective(),
        "structural_deficiency_degree": report.structural_deficiency_degree(),
    }
    print(machine_block(summary))
    return EXIT_OK


def cmd_realize(args) -> int:
    model, scan_cfg = load_model(args.model)
    data = _analyze(model, scan_cfg)
    target = load_target(args.target, data.p)
    try:
        tau = DelayTuple(tuple(args.tau)) if args.tau else model.delays
    except PreconditionError as exc:
        raise PreconditionError(f"{exc}; resample the delay tuple") from exc
    if target["kind"] == "jet":
        res = realize_jet(data, tau, target["h"], target["q"],
                          mode=args.mode)
        payload = {
            "version": __version__, "command": "realize", "kind": "jet",
            "mode": res.mode, "tau": list(res.tau),
            "eta": jet_payload(res.eta), "xi": jet_payload(res.xi),
            "residuals": {str(k): v for k, v in res.residuals.items()},
        }
        print("realized mu-independent jet (eta):")
        for deg, f in sorted(res.eta.items()):
            for ent in poly_entries(f):
                print(f"  degree {deg}  exps={ent['exponents']}  "
                      f"coeff={ent['coeff']:.6g}")
        print("realized vanishing-at-mu0 jet (xi):")
        for deg, f in sorted(res.xi.items()):
            for ent in poly_entries(f):
                print(f"  degree {deg}  exps={ent['exponents']}  "
                      f"coeff={ent['coeff']:.6g}")
        print("round-trip residuals:",
              {k: f"{v:.3e}" for k, v in res.residuals.items()})
    else:
        base_nf = normal_form(reduce_to_ode(model, data),
                              max([model.order] + target["add"].degrees()))
        full_target = base_nf.radial.extend_mu(target["s"]) + target["add"]
        res = realize_unfolding(data, tau, model, full_target,
                                constrained_degrees=target["constrained"])
        payload = {
            "version": __version__, "command": "realize",
            "kind": "unfolding", "mode": res.mode, "tau": list(res.tau),
            "xi": jet_payload(res.xi),
            "residuals": {str(k): v for k, v in res.residuals.items()},
            "mu0_drift": res.mu0_drift,
        }
        print("realized unfolding jet (xi):")
        for deg, f in sorted(res.xi.items()):
            for ent in poly_entries(f):
                print(f"  degree {deg}  exps={ent['exponents']}  "
                      f"coeff={ent['coeff']:.6g}")
        print("round-trip residuals:",
              {k: f"{v:.3e}" for k, v in res.residuals.items()},
              f"mu0 drift: {res.mu0_drift:.3e}")
    if args.out:
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(machine_block(payload) + "\n")
        print(f"wrote {args.out}.json")
    else:
        print(machine_block(payload))
    return EXIT_OK


def cmd_selftest(args) -> int:
    ok = run_selftest(args.level)
    return EXIT_OK if ok else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="snhopf",
        description="normal forms and realizability for scalar delay "
                    "equations at a saddle-node/multi-Hopf interaction")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="axis spectrum and hypothesis check")
    sp.add_argument("model")
    sp.add_argument("--rmax", type=int, default=12,
                    help="integer height for the non-resonance scan")
    sp.set_defaults(func=cmd_spectrum)

    nf = sub.add_parser("nf", help="equivariant normal form and polar parts")
    nf.add_argument("model")
    nf.add_argument("--order", type=int, default=None)
    nf.add_argument("--mode", choices=[MODE_ODE_REDUCTION],
                    default=MODE_ODE_REDUCTION,
                    help="degree >= 3 terms always carry this mode tag")
    nf.add_argument("--out", default=None, help="report file prefix")
    nf.set_defaults(func=cmd_nf)

    rs = sub.add_parser("rank-scan", help="generic-surjectivity scan")
    rs.add_argument("model")
    rs.add_argument("--order", type=int, default=None)
    rs.add_argument("--samples", type=int, default=200)
    rs.add_argument("--delays", type=int, default=None,
                    help="number of delay slots (default p+1)")
    rs.add_argument("--seed", type=int, default=0)
    rs.add_argument("--kind", choices=[PAIRED, PLAIN], default=PAIRED)
    rs.add_argument("--csv", default=None)
    rs.set_defaults(func=cmd_rank_scan)

    rl = sub.add_parser("realize", help="solve the realizability problem")
    rl.add_argument("model")
    rl.add_argument("target")
    rl.add_argument("--tau", type=float, nargs="+", default=None)
    rl.add_argument("--mode", choices=[MODE_ODE_REDUCTION, MODE_LEADING],
                    default=MODE_ODE_REDUCTION)
    rl.add_argument("--out", default=None, help="report file prefix")
    rl.set_defaults(func=cmd_realize)

    st = sub.add_parser("selftest", help="built-in invariant suite")
    st.add_argument("--level", choices=["fast", "full"], default="fast")
    st.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (HypothesisError, PreconditionError) as exc:
        print(f"precondition failure: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
