"""Command-line entry point.

Exit codes: 0 certified success, 1 certification (or sample-access) failure, 2 usage error.
"""

import argparse
import logging
import math
import sys

from .artifacts import ArtifactError
from .bucketing import SampleAccess, SampleAccessError, SampleSet, modulation_set, sample_positions
from .filters import FilterCertificationError, build_filter, certify_filter, load_filter, save_filter
from .forge import ForgeError, load_schedule, save_schedule, verify_condition
from .estimators import FORGE_MODES, PIPELINES, design_schedule
from .explicit import quadratic_residue_rows, subgroup_rows, weyl_polynomial_rows
from .oracles import check_guarantee
from .recovery import RecoveryParams, SparseApproximation, UncertifiedScheduleError
from .signals import FORMATS, read_signal
from .subsample import SubsampleError, SubsampleParams, minimal_oversampling, subsample_derandomized, verify_incoherence

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FAILURES = (
    ForgeError,
    FilterCertificationError,
    UncertifiedScheduleError,
    SampleAccessError,
    SubsampleError,
    ArtifactError,
)


def _schedule_and_filter(args):
    schedule, fields = load_schedule(args.schedule)
    if getattr(args, "filter", None):
        filt = load_filter(args.filter)
    else:
        width = int(fields["width"]) if "width" in fields else None
        filt = build_filter(schedule.n, schedule.B, schedule.F, width=width)
    return schedule, filt


def cmd_schedule_build(args):
    filt, schedule = design_schedule(args.n, args.k, args.F, args.bucket_factor, args.mode, args.seed)
    save_schedule(schedule, args.out, filt)
    if args.filter_out:
        save_filter(filt, args.filter_out)
    rep = verify_condition(schedule, filt)
    print(f"schedule n={schedule.n} B={schedule.B} F={schedule.F} d={schedule.d} lambda={schedule.lam}")
    print(f"worst pair {rep.worst_pair} sum {rep.worst_sum:.6g} threshold {rep.threshold:.6g}")
    return EXIT_OK


def cmd_schedule_verify(args):
    schedule, filt = _schedule_and_filter(args)
    rep = verify_condition(schedule, filt)
    print(f"worst pair {rep.worst_pair} sum {rep.worst_sum:.6g} threshold {rep.threshold:.6g}")
    print("PASS" if rep.passed else "FAIL")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_samples(args):
    schedule, filt = _schedule_and_filter(args)
    mods = modulation_set(schedule.n) if args.pipeline == "sublinear" else (0,)
    samples = sample_positions(schedule, filt, mods)
    samples.save(args.out, pipeline=args.pipeline, d=schedule.d, B=schedule.B)
    print(f"{len(samples)} of {schedule.n} samples")
    return EXIT_OK


def cmd_recover(args):
    schedule, filt = _schedule_and_filter(args)
    x = read_signal(args.signal, args.format)
    if x.size != schedule.n:
        raise ValueError(f"signal length {x.size} does not match schedule n={schedule.n}")
    if args.samples:
        n, allowed = SampleSet.load_indices(args.samples)
        if n != x.size:
            raise ValueError(f"sample set is for n={n}, signal has n={x.size}")
    else:
        mods = modulation_set(schedule.n) if args.pipeline == "sublinear" else (0,)
        allowed = sample_positions(schedule, filt, mods).indices
    access = SampleAccess.from_signal(x, allowed)
    params = RecoveryParams(args.k, args.mu, args.snr_bound)
    result = PIPELINES[args.pipeline](access, params, schedule, filt)
    result.save(args.out, pipeline=args.pipeline, k=args.k, mu=float(args.mu), snr_bound=float(args.snr_bound))
    print(f"{len(result)} frequencies from {len(access.requested)} samples")
    return EXIT_OK


def cmd_verify_guarantee(args):
    x = read_signal(args.signal, args.format)
    est = SparseApproximation.load(args.estimate)
    if est.n != x.size:
        raise ValueError(f"estimate is for n={est.n}, signal has n={x.size}")
    rep = check_guarantee(x, est.to_dense(), args.k)
    print(rep.to_text())
    return EXIT_OK if rep.linf_pass else EXIT_FAIL


def _emit_selection(sel, out, measured, extra=None):
    print(f"rows {len(sel.rows)}")
    print(f"certified_bound {sel.certified_bound!r}")
    print(f"measured {measured!r}")
    if out:
        sel.save(out, **(extra or {}))
    return EXIT_OK if measured <= sel.certified_bound else EXIT_FAIL


def cmd_forge_gauss(args):
    sel = quadratic_residue_rows(args.p)
    return _emit_selection(sel, args.out, sel.measured)


def cmd_forge_weyl(args):
    coeffs = [int(c) for c in args.coeffs.split(",")] if args.coeffs else None
    sel = weyl_polynomial_rows(args.p, args.degree, args.rows, coeffs)
    print(f"envelope {sel.envelope!r}")
    return _emit_selection(sel, args.out, sel.measured, {"degree": args.degree})


def cmd_forge_subgroup(args):
    sel = subgroup_rows(args.p, args.order)
    print(" ".join(map(str, sel.rows)))
    return _emit_selection(sel, args.out, sel.measured, {"order": args.order})


def cmd_forge_subsample(args):
    C_m = args.C_m if args.C_m is not None else minimal_oversampling(args.n, args.k)
    if C_m is None:
        raise SubsampleError(f"no oversampling constant with m < n works for n={args.n}, k={args.k}")
    sel = subsample_derandomized(None, SubsampleParams(args.n, args.k, C_m))
    rep = verify_incoherence(sel)
    return _emit_selection(sel, args.out, rep.incoherence)


def cmd_filter(args):
    filt = build_filter(args.n, args.B, args.F)
    rep = certify_filter(filt)
    save_filter(filt, args.out)
    print(f"width {filt.width} core {filt.core} support {rep.support} limit {rep.support_limit}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="detsft", description="Deterministic sparse Fourier transform tools.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    sch = sub.add_parser("schedule", help="build or verify a hashing schedule").add_subparsers(dest="action", required=True)
    b = sch.add_parser("build")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--F", type=int, default=4)
    b.add_argument("--bucket-factor", type=int, default=2)
    b.add_argument("--mode", choices=FORGE_MODES, default="sample-verify")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--filter-out")
    b.set_defaults(func=cmd_schedule_build)
    v = sch.add_parser("verify")
    v.add_argument("--schedule", required=True)
    v.add_argument("--filter")
    v.set_defaults(func=cmd_schedule_verify)

    s = sub.add_parser("samples", help="export the deterministic sample set")
    s.add_argument("--schedule", required=True)
    s.add_argument("--filter")
    s.add_argument("--pipeline", choices=sorted(PIPELINES), default="linear")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_samples)

    r = sub.add_parser("recover", help="recover a sparse spectrum")
    r.add_argument("--pipeline", choices=sorted(PIPELINES), default="linear")
    r.add_argument("--schedule", required=True)
    r.add_argument("--filter")
    r.add_argument("--signal", required=True)
    r.add_argument("--format", choices=FORMATS)
    r.add_argument("--samples", help="sample-set file; reading any other index is an error")
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--mu", type=_positive_float, required=True)
    r.add_argument("--snr-bound", type=_positive_float, required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_recover)

    ver = sub.add_parser("verify", help="oracle checks").add_subparsers(dest="action", required=True)
    g = ver.add_parser("guarantee")
    g.add_argument("--signal", required=True)
    g.add_argument("--format", choices=FORMATS)
    g.add_argument("--estimate", required=True)
    g.add_argument("--k", type=int, required=True)
    g.set_defaults(func=cmd_verify_guarantee)

    fg = sub.add_parser("forge", help="incoherent row selections").add_subparsers(dest="kind", required=True)
    ga = fg.add_parser("gauss")
    ga.add_argument("--p", type=int, required=True)
    ga.add_argument("--out")
    ga.set_defaults(func=cmd_forge_gauss)
    we = fg.add_parser("weyl")
    we.add_argument("--p", type=int, required=True)
    we.add_argument("--degree", type=int, required=True)
    we.add_argument("--rows", type=int, required=True)
    we.add_argument("--coeffs", help="comma-separated integer coefficients, lowest degree first")
    we.add_argument("--out")
    we.set_defaults(func=cmd_forge_weyl)
    sg = fg.add_parser("subgroup")
    sg.add_argument("--p", type=int, required=True)
    sg.add_argument("--order", type=int, required=True)
    sg.add_argument("--out")
    sg.set_defaults(func=cmd_forge_subgroup)
    ss = fg.add_parser("subsample")
    ss.add_argument("--n", type=int, required=True)
    ss.add_argument("--k", type=int, required=True)
    ss.add_argument("--C-m", dest="C_m", type=_positive_float)
    ss.add_argument("--out")
    ss.set_defaults(func=cmd_forge_subsample)

    fl = sub.add_parser("filter", help="build, certify and export a flat filter")
    fl.add_argument("--n", type=int, required=True)
    fl.add_argument("--B", type=int, required=True)
    fl.add_argument("--F", type=int, default=4)
    fl.add_argument("--out", required=True)
    fl.set_defaults(func=cmd_filter)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FAILURES as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
