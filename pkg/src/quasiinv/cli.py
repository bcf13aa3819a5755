"""Command-line front-end.

    quasiinv report SPEC [--format text|json] [--out FILE]
    quasiinv validate SPEC
    quasiinv verify SPEC [--seed S] [--mc N] [--bf N] [--format text|json]
    quasiinv sweep --family F [--grid name=start:stop:count ...] [--out FILE] [--workers W]

``SPEC`` is a path to a JSON channel spec, or ``-`` for stdin.
Exit status: 0 success, 1 physics/validation failure, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .channel import (
    QubitChannel,
    affine_closed_form,
    is_completely_positive,
    trace_preservation_residual,
)
from .errors import ChannelValidationError, InconsistencyError, InvalidInputError
from .fidelity import composed_avg_fidelity, fidelity_formulas, mc_avg_fidelity
from .quasi_inverse import (
    QuasiInverseResult,
    brute_force_best_unitary,
    q_form_from_affine,
    q_form_from_kraus,
    quasi_inverse,
)
from .specs import SpecError, kraus_spec, parse_channel_spec
from .sweep import FAMILIES, parse_axis, sweep_csv

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

MC_SIGMAS = 4.0
BF_TOL = 1e-5
BF_EXCESS_TOL = 1e-9
ROUTE_TOL = 1e-12
FORMULA_TOL = 1e-10
AFFINE_TOL = 1e-12


class UsageError(Exception):
    """Bad command-line arguments or unreadable input (exit status 2)."""


def read_spec(path: str) -> QubitChannel:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_channel_spec(text)


def _list(x) -> list:
    return np.asarray(x, dtype=float).tolist()


def optimizer_dict(res: QuasiInverseResult) -> dict:
    V = res.v_opt
    return {
        "x0": V.x0,
        "x": _list(V.x),
        "axis": _list(V.axis),
        "phi": V.angle,
        "bloch_rotation_angle": 2.0 * V.angle,
    }


def build_report(ch: QubitChannel) -> dict:
    """Everything the ``report`` command prints, as plain JSON types."""
    res = quasi_inverse(ch)
    cf = affine_closed_form(ch)
    qf = q_form_from_kraus(ch)
    return {
        "kraus_count": len(ch),
        "M": _list(ch.M),
        "t": _list(ch.t),
        "B": _list(cf.B),
        "v": _list(cf.split.v),
        "Q": _list(qf.Q),
        "Q_eigenvalues": _list(qf.spectrum[0]),
        "f_before": res.f_before,
        "f_after": res.f_after,
        "lambda_max": res.lambda_max,
        "delta_f": res.delta_f,
        "optimizer": optimizer_dict(res),
        "degenerate": res.degenerate,
        "eigen_gap": res.gap,
        "kraus": kraus_spec(ch),
    }


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{c: .6f}" for c in v) + ")"


def format_report(rep: dict) -> str:
    opt = rep["optimizer"]
    lines = [
        f"Kraus operators: {rep['kraus_count']}",
        "M =",
        *(f"  {_fmt_vec(row)}" for row in rep["M"]),
        f"t = {_fmt_vec(rep['t'])}",
        "B =",
        *(f"  {_fmt_vec(row)}" for row in rep["B"]),
        f"v = {_fmt_vec(rep['v'])}",
        "Q =",
        *(f"  {_fmt_vec(row)}" for row in rep["Q"]),
        f"Q eigenvalues = {_fmt_vec(rep['Q_eigenvalues'])}",
        f"average fidelity: {rep['f_before']:.6f} -> {rep['f_after']:.6f}",
        f"lambda_max = {rep['lambda_max']:.6f}, delta F = {rep['delta_f']:.6f}",
        f"optimizer V = x0 + i x.sigma: x0 = {opt['x0']:.6f}, x = {_fmt_vec(opt['x'])}",
        f"  axis {_fmt_vec(opt['axis'])}, phi = {opt['phi']:.6f} "
        f"(Bloch rotation by {opt['bloch_rotation_angle']:.6f})",
        f"degenerate: {'yes' if rep['degenerate'] else 'no'} (eigen gap {rep['eigen_gap']:.3e})",
    ]
    return "\n".join(lines)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def run_verification(ch: QubitChannel, seed: int = 0, n_mc: int = 100_000, n_bf: int = 100_000) -> tuple[dict, list[Check]]:
    """Run every oracle against the closed forms; returns ``(summary, checks)``."""
    checks = []

    values = fidelity_formulas(ch)
    spread = max(values.values()) - min(values.values())
    checks.append(Check("fidelity_formulas", spread <= FORMULA_TOL, f"spread {spread:.3e}"))

    try:
        cf = affine_closed_form(ch)
        gap = max(
            float(np.max(np.abs(cf.affine.M - ch.M))), float(np.max(np.abs(cf.affine.t - ch.t)))
        )
        checks.append(Check("affine_closed_vs_trace", gap <= AFFINE_TOL, f"max diff {gap:.3e}"))
    except InconsistencyError as exc:
        checks.append(Check("affine_closed_vs_trace", False, str(exc)))

    q_gap = float(np.max(np.abs(q_form_from_kraus(ch).Q - q_form_from_affine(ch.affine).Q)))
    checks.append(Check("q_kraus_vs_affine", q_gap <= ROUTE_TOL, f"max diff {q_gap:.3e}"))

    cp = is_completely_positive(ch)
    checks.append(Check("complete_positivity", cp.completely_positive, f"min Choi eigenvalue {cp.min_eigenvalue:.3e}"))

    res = quasi_inverse(ch)
    after = composed_avg_fidelity(res.v_opt.rotation(), ch.M)
    checks.append(
        Check("corrected_fidelity", abs(after - res.f_after) <= FORMULA_TOL, f"|diff| {abs(after - res.f_after):.3e}")
    )

    mc = mc_avg_fidelity(ch, n=n_mc, seed=seed)
    dev = abs(mc.mean - res.f_before)
    checks.append(
        Check(
            "monte_carlo",
            mc.agrees_with(res.f_before, MC_SIGMAS),
            f"mc {mc.mean:.6f} +- {mc.stderr:.2e}, closed form {res.f_before:.6f}, "
            f"{dev / mc.stderr if mc.stderr > 0 else 0.0:.2f} sigma",
        )
    )

    bf = brute_force_best_unitary(ch, samples=n_bf, seed=seed)
    diff = bf.delta_f - res.delta_f
    checks.append(
        Check(
            "brute_force",
            abs(diff) <= BF_TOL and diff <= BF_EXCESS_TOL,
            f"brute force {bf.delta_f:.8f}, eigensolver {res.delta_f:.8f}, diff {diff:.2e}",
        )
    )
    summary = {
        "f_before": res.f_before,
        "f_after": res.f_after,
        "delta_f": res.delta_f,
        "degenerate": res.degenerate,
        "optimizer": optimizer_dict(res),
        "mc": {"mean": mc.mean, "stderr": mc.stderr, "samples": mc.samples},
        "brute_force": {"delta_f": bf.delta_f, "x0": bf.unitary.x0, "x": _list(bf.unitary.x)},
    }
    return summary, checks


def cmd_report(args) -> int:
    rep = build_report(read_spec(args.spec))
    text = json.dumps(rep, indent=2) if args.format == "json" else format_report(rep)
    _emit(text + "\n", args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    ch = read_spec(args.spec)
    residual = trace_preservation_residual(ch.a, ch.b)
    cp = is_completely_positive(ch)
    print(f"Kraus operators: {len(ch)}")
    print(f"trace preservation residual: {residual:.3e}")
    print(f"min Choi eigenvalue: {cp.min_eigenvalue:.3e}")
    if not cp.completely_positive:
        print("INVALID: not completely positive")
        return EXIT_FAILURE
    print("valid")
    return EXIT_OK


def cmd_verify(args) -> int:
    ch = read_spec(args.spec)
    if args.mc < 100 or args.bf < 1000:
        raise UsageError("--mc needs at least 100 samples and --bf at least 1000")
    summary, checks = run_verification(ch, args.seed, args.mc, args.bf)
    ok = all(c.passed for c in checks)
    if args.format == "json":
        summary["checks"] = [c.__dict__ for c in checks]
        summary["passed"] = ok
        print(json.dumps(summary, indent=2))
    else:
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:24s} {c.detail}")
        print(f"degenerate: {'yes' if summary['degenerate'] else 'no'}")
        print("all checks passed" if ok else "verification FAILED")
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_sweep(args) -> int:
    try:
        axes = [parse_axis(g) for g in args.grid]
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from None
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    try:
        text = sweep_csv(args.family, axes, args.workers)
    except InvalidInputError as exc:
        # out-of-domain or unknown grid axes are argument errors
        raise UsageError(str(exc)) from None
    _emit(text, args.out)
    return EXIT_OK


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasiinv", description="Average fidelity and optimal unitary correction of qubit channels."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("report", help="affine map, fidelity and quasi-inverse of a channel")
    p.add_argument("spec", help="JSON channel spec file, or - for stdin")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("validate", help="check trace preservation and complete positivity")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("verify", help="check closed forms against Monte Carlo and brute force")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mc", type=int, default=100_000, help="Monte Carlo samples")
    p.add_argument("--bf", type=int, default=100_000, help="brute-force unitary samples")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="quasi-inverse over a parameter grid, as CSV")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument(
        "--grid", action="append", default=[], metavar="NAME=START:STOP:COUNT",
        help="grid axis; repeat per parameter, omitted axes use the family default",
    )
    p.add_argument("--out", help="CSV output file (default stdout)")
    p.add_argument("--workers", type=int, default=1, help="threads, one grid row per task")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ChannelValidationError, InvalidInputError, InconsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
