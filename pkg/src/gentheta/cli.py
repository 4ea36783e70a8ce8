"""Command-line front end: curve ingestion, evaluation, verification campaigns.

Commands (selected with --command):

* validate   -- parse the input and print the genus report (curve documents)
                or the reciprocity residuals (period-data documents);
* theta-eval -- evaluate the translated section at one point, in a chart;
* abel-map   -- tabulate the Abel map along a straight sample path;
* zeros      -- locate the zeros of the translated pulled-back section;
* verify     -- run an Abel-theorem campaign over seeded random shifts,
                emitting the report and a flat CSV;
* lemmas     -- quasi-periodicity residual table over seeded fixtures.

Identical (input, seed) pairs produce byte-identical outputs.  Every error
exits nonzero with a machine-readable category on stderr.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness, periods, sections, theta as theta_mod
from .curves import genus_accounting, parse_curve_spec
from .errors import GenThetaError, ParseError, ValidationError
from .p1 import ChartIndex, abel_map_p1, enumerate_higher, enumerate_pairs
from .periods import TorusCurve, abel_map_torus, build_period_data, parse_period_data

EXIT_CODES = {
    "parse": 2,
    "validation": 3,
    "degenerate-shift": 4,
    "precision": 5,
    "geometry": 6,
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="gentheta",
        description="Generalized theta functions of singular curves: evaluation and verification.",
    )
    p.add_argument("--command", required=True,
                   choices=["validate", "theta-eval", "abel-map", "zeros", "verify", "lemmas"])
    p.add_argument("--input", required=True, help="curve-spec or period-data JSON document")
    p.add_argument("--output", help="output path (reports; CSV lands next to it as .csv)")
    p.add_argument("--shifts", type=int, default=10, help="number of random shifts / fixtures")
    p.add_argument("--seed", type=int, default=0, help="seed for reproducible shift draws")
    p.add_argument("--eps", type=float, default=1e-12, help="theta truncation target")
    p.add_argument("--chart", default="", help="chart override, e.g. 'xi:0;zeta:0,1'")
    p.add_argument("--point", help="evaluation point 're,im' (theta-eval)")
    p.add_argument("--a", help="explicit shift a entries: 're,im;re,im;...'")
    p.add_argument("--b", help="explicit shift b entries")
    p.add_argument("--lam", help="explicit shift lambda entries")
    p.add_argument("--path-from", help="path start 're,im' (abel-map)")
    p.add_argument("--path-to", help="path end 're,im' (abel-map)")
    p.add_argument("--path-steps", type=int, default=8, help="sample count (abel-map)")
    return p


def _parse_complex(text, what):
    try:
        re_s, im_s = text.split(",")
        return complex(float(re_s), float(im_s))
    except (ValueError, AttributeError) as exc:
        raise ParseError(f"{what}: expected 're,im', got {text!r}") from exc


def _parse_complex_list(text, what):
    if not text:
        return ()
    return tuple(_parse_complex(part, what) for part in text.split(";") if part)


def _parse_chart(text):
    xi, zeta = set(), set()
    if text:
        for family in text.split(";"):
            family = family.strip()
            if not family:
                continue
            if ":" not in family:
                raise ParseError(f"chart spec needs 'xi:...' or 'zeta:...', got {family!r}")
            name, _, idxs = family.partition(":")
            target = {"xi": xi, "zeta": zeta}.get(name.strip())
            if target is None:
                raise ParseError(f"unknown chart family {name!r}")
            for tok in idxs.split(","):
                tok = tok.strip()
                if tok:
                    target.add(int(tok))
    return ChartIndex(frozenset(xi), frozenset(zeta))


def _load_input(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read input {path}: {exc}") from exc
    probe = text.lstrip()
    if '"base_genus"' in probe or "'base_genus'" in probe:
        return "curve", parse_curve_spec(text)
    return "periods", parse_period_data(text)


def _require_curve(kind, obj):
    if kind != "curve":
        raise ValidationError("this command needs a curve-spec document")
    return obj


def _fixture_setup(curve, eps):
    """(torus_curve_or_None, period_data_or_None, genus_report, policy)."""
    rep = genus_accounting(curve)
    pol = theta_mod.TruncationPolicy(epsilon=eps)
    if curve.base_genus == 0:
        return None, None, rep, pol
    if curve.base_genus == 1:
        tc = TorusCurve.from_curve(curve)
        pd = build_period_data(tc)
        return tc, pd, rep, pol
    raise ValidationError("commands beyond validate need base_genus 0 or 1 curves")


def _make_shifts(args, rep):
    explicit = args.a or args.b or args.lam
    if explicit:
        a = _parse_complex_list(args.a, "--a")
        b = _parse_complex_list(args.b, "--b")
        lam = _parse_complex_list(args.lam, "--lam")
        if len(a) != rep.M or len(b) != rep.N or len(lam) != rep.g_tilde:
            raise ValidationError(
                f"explicit shift needs {rep.M} a, {rep.N} b, {rep.g_tilde} lambda entries"
            )
        return [sections.ShiftParams(a=a, b=b, lam=lam)]
    return harness.random_shifts(rep.M, rep.N, rep.g_tilde, args.shifts, args.seed)


def _emit(args, text, extra=None):
    if args.output:
        out = Path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        if extra is not None:
            out.with_suffix(out.suffix + ".csv").write_text(extra, encoding="utf-8")
    else:
        sys.stdout.write(text)
        if extra is not None:
            sys.stdout.write(extra)


def cmd_validate(args):
    kind, obj = _load_input(args.input)
    if kind == "curve":
        rep = genus_accounting(obj)
        text = (
            f"valid curve: g_tilde={rep.g_tilde} M={rep.M} N={rep.N} "
            f"g_arith={rep.g_arith} section_degree={rep.section_degree}\n"
        )
        if rep.section_degree != rep.g_arith:
            text += (
                "note: section degree exceeds arithmetic genus "
                "(higher-order generators of order > 1); both counts are reported\n"
            )
    else:
        report = periods.validate_periods(obj)
        res = " ".join(f"{r:.3e}" for r in report["reciprocity_residuals"])
        text = (
            f"valid period data: g={report['g']} M={report['M']} N={report['N']}\n"
            f"reciprocity residuals: {res}\n"
        )
    _emit(args, text)
    return 0


def cmd_theta_eval(args):
    kind, curve = _load_input(args.input)
    curve = _require_curve(kind, curve)
    tc, pd, rep, pol = _fixture_setup(curve, args.eps)
    if args.point is None:
        raise ValidationError("theta-eval needs --point")
    p = _parse_complex(args.point, "--point")
    shift = _make_shifts(args, rep)[0]
    chart = _parse_chart(args.chart)
    if curve.base_genus == 0:
        ap = abel_map_p1(curve, p, chart=chart if not chart.empty else None)
        tv = sections.gen_theta_rational(curve, ap, shift, chart if not chart.empty else ap.chart)
    else:
        ap = abel_map_torus(tc, p, pol)
        tv = sections.gen_theta_from_abel(ap, pd, shift, chart, pol)
    text = (
        f"theta-eval at {harness._fmt(p)} chart xi={sorted(tv.chart.xi_at_infinity)} "
        f"zeta={sorted(tv.chart.zeta_at_infinity)}\n"
        f"value: {harness._fmt(tv.value)}\n"
    )
    _emit(args, text)
    return 0


def cmd_abel_map(args):
    kind, curve = _load_input(args.input)
    curve = _require_curve(kind, curve)
    tc, pd, rep, pol = _fixture_setup(curve, args.eps)
    if args.path_from is None or args.path_to is None:
        raise ValidationError("abel-map needs --path-from and --path-to")
    start = _parse_complex(args.path_from, "--path-from")
    end = _parse_complex(args.path_to, "--path-to")
    steps = max(2, args.path_steps)
    lines = ["# point | exp_xi | zeta | z | chart"]
    for k in range(steps):
        p = start + (end - start) * k / (steps - 1)
        ap = abel_map_p1(curve, p) if curve.base_genus == 0 else abel_map_torus(tc, p, pol)
        lines.append(
            " | ".join(
                [
                    harness._fmt(p),
                    " ".join(harness._fmt(v) for v in ap.exp_xi),
                    " ".join(harness._fmt(v) for v in ap.zeta),
                    " ".join(harness._fmt(v) for v in ap.z),
                    f"xi={sorted(ap.chart.xi_at_infinity)} zeta={sorted(ap.chart.zeta_at_infinity)}",
                ]
            )
        )
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_zeros(args):
    kind, curve = _load_input(args.input)
    curve = _require_curve(kind, curve)
    tc, pd, rep, pol = _fixture_setup(curve, args.eps)
    shift = _make_shifts(args, rep)[0]
    if curve.base_genus == 0:
        zs = harness.find_zeros_rational(curve, shift)
    else:
        zs = harness.find_zeros_torus(tc, pd, shift, pol)
    lines = [f"zeros: {zs.total_count} (section degree {rep.section_degree})"]
    for z, m in zs.zeros:
        lines.append(f"{harness._fmt_point(z)} x{m}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_verify(args):
    kind, curve = _load_input(args.input)
    curve = _require_curve(kind, curve)
    tc, pd, rep, pol = _fixture_setup(curve, args.eps)
    shifts = harness.random_shifts(rep.M, rep.N, rep.g_tilde, args.shifts, args.seed)
    target = tc if curve.base_genus == 1 else curve
    report = harness.verify_abel_theorem(target, pd, shifts, pol)
    header = [f"seed: {args.seed}", f"input: {Path(args.input).name}"]
    text = harness.format_report(report, header_lines=header)
    if curve.base_genus == 0:
        closure = harness.contour_closure_rational(curve, shifts[0])
        text += "-- contour closure (shift 0)\n"
        for fam in ("exp_xi", "zeta", "xi_byparts"):
            vals = " ".join(f"{v:.3e}" for v in closure[fam])
            text += f"{fam}: {vals}\n"
    csv = harness.format_csv(report)
    _emit(args, text, extra=csv)
    return 0


def cmd_lemmas(args):
    kind, obj = _load_input(args.input)
    pol = theta_mod.TruncationPolicy(epsilon=args.eps)
    rng = np.random.default_rng(args.seed)
    if kind == "curve":
        curve = obj
        if curve.base_genus != 1:
            raise ValidationError("the lemmas command needs a genus-1 curve or period data")
        tc = TorusCurve.from_curve(curve)
        pd = build_period_data(tc)
    else:
        pd = obj
    g = pd.g
    Z = pd.Z
    lines = ["# fixture | check | residual"]
    worst = 0.0
    for k in range(args.shifts):
        z = rng.normal(scale=0.4, size=g) + 1j * rng.normal(scale=0.2, size=g)
        W = rng.normal(size=(3, g)) + 1j * rng.normal(size=(3, g))
        alpha = int(rng.integers(g))
        for size in range(0, 4):
            I = tuple(range(size))
            r = theta_mod.check_lemma2(I, alpha, z, Z, W, pol)
            worst = max(worst, r)
            lines.append(f"{k} | lemma2 |I|={size} | {r:.3e}")
        pd_syn = periods.PeriodData(
            Z=Z,
            Y=np.zeros((g, 0)),
            W=np.ascontiguousarray(W[:2].T),
            nu=np.zeros((g, 0)),
        )
        r = sections.check_lemma3(rng.normal(size=2) + 1j * rng.normal(size=2), z, pd_syn, alpha, pol)
        worst = max(worst, r)
        lines.append(f"{k} | lemma3 N=2 | {r:.3e}")
        nu = 0.3 * (rng.normal(size=(g, 1)) + 1j * rng.normal(size=(g, 1)))
        pd_gen = periods.PeriodData(Z=Z, Y=2j * np.pi * nu, W=np.ascontiguousarray(W[:1].T), nu=nu)
        shift = sections.ShiftParams(
            a=(complex(np.exp(0.5 * rng.normal() + 0.5j * rng.normal())),),
            b=(complex(rng.normal() + 1j * rng.normal()),),
            lam=tuple(0.1 * (rng.normal(size=g) + 1j * rng.normal(size=g))),
        )
        xi = complex(rng.normal() + 1j * rng.normal())
        ze = complex(rng.normal() + 1j * rng.normal())
        r = sections.quasi_periodicity_residual([xi], [ze], z, pd_gen, shift, alpha, pol)
        worst = max(worst, r)
        lines.append(f"{k} | lemma4 M=N=1 | {r:.3e}")
        if kind == "curve" and pd.M == 1 and pd.N == 0:
            sh = sections.ShiftParams(a=(complex(np.exp(0.3 + 0.4j)),), b=(), lam=(0.1 + 0.05j,) * g)
            r = sections.quasi_periodicity_residual([xi], [], z, pd, sh, alpha, pol)
            worst = max(worst, r)
            lines.append(f"{k} | node B-shift | {r:.3e}")
        if kind == "curve" and pd.M == 0 and pd.N == 1:
            sh = sections.ShiftParams(a=(), b=(0.4 - 0.2j,), lam=(0.1 + 0.05j,) * g)
            r = sections.quasi_periodicity_residual([], [ze], z, pd, sh, alpha, pol)
            worst = max(worst, r)
            lines.append(f"{k} | cusp B-shift | {r:.3e}")
    lines.append(f"max residual: {worst:.3e}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "theta-eval": cmd_theta_eval,
    "abel-map": cmd_abel_map,
    "zeros": cmd_zeros,
    "verify": cmd_verify,
    "lemmas": cmd_lemmas,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except GenThetaError as exc:
        sys.stderr.write(f"error: category={exc.category}: {exc}\n")
        return EXIT_CODES.get(exc.category, 1)


if __name__ == "__main__":
    sys.exit(main())
