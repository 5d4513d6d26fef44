"""Command-line surface: validate | gamma | count | multiply | bench | slp-verify.

Exit codes: 0 success / property holds, 1 checked-property failure,
2 usage or parse error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import bench as bench_mod
from . import catalog
from . import growth as growth_mod
from . import slp as slp_mod
from . import sms as sms_mod
from .lrp import validate_scheme
from .recursion import RecursionPlan, multiply, multiply_alt

_PARSE_ERRORS = (
    catalog.CatalogError,
    sms_mod.SmsParseError,
    slp_mod.SlpParseError,
    ValueError,
    OSError,
)


def _fail(message, code):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.version_option(__version__)
@click.option(
    "--scheme-dir",
    "scheme_dirs",
    multiple=True,
    type=click.Path(exists=True, file_okay=False),
    help="Extra directories with scheme bundles (also FMM_SCHEME_DIR).",
)
@click.pass_context
def main(ctx, scheme_dirs):
    """Laboratory for bilinear matrix-multiplication schemes."""
    ctx.ensure_object(dict)
    ctx.obj["dirs"] = list(scheme_dirs)


def _resolve(ctx, scheme_id):
    try:
        return catalog.resolve(scheme_id, ctx.obj["dirs"])
    except _PARSE_ERRORS as exc:
        _fail(str(exc), 2)


def _scheme_from_triple(paths):
    L = sms_mod.load_sms(paths[0])
    R = sms_mod.load_sms(paths[1])
    P = sms_mod.load_sms(paths[2])
    bundle = catalog._bundle_from_matrices(Path(paths[0]).stem, L, R, P)
    return bundle


@main.command()
@click.option("--scheme", "scheme_id", help="Builtin or scheme-dir bundle id.")
@click.option(
    "--lrp",
    nargs=3,
    type=click.Path(exists=True, dir_okay=False),
    help="Three SMS files: L R P.",
)
@click.pass_context
def validate(ctx, scheme_id, lrp):
    """Exhaustively validate a scheme (and alt factorization if present)."""
    if bool(scheme_id) == bool(lrp):
        _fail("give exactly one of --scheme or --lrp", 2)
    try:
        bundle = (
            _resolve(ctx, scheme_id) if scheme_id else _scheme_from_triple(lrp)
        )
    except _PARSE_ERRORS as exc:
        _fail(str(exc), 2)
    report = validate_scheme(bundle.scheme)
    click.echo(str(report))
    ok = report.valid
    if bundle.alt is not None:
        for got, want, label in (
            (np.dot(bundle.alt.l_alt, bundle.alt.l_cob), bundle.scheme.L, "L_alt @ L_cob == L"),
            (np.dot(bundle.alt.r_alt, bundle.alt.r_cob), bundle.scheme.R, "R_alt @ R_cob == R"),
            (np.dot(bundle.alt.p_cob, bundle.alt.p_alt), bundle.scheme.P, "P_cob @ P_alt == P"),
        ):
            same = all(a == b for a, b in zip(got.reshape(-1), want.reshape(-1)))
            click.echo(f"  alt factorization {label}: {'ok' if same else 'FAILED'}")
            ok = ok and same
    sys.exit(0 if ok else 1)


_NORM_NAMES = {"inf": growth_mod.INF, "2": 2.0, "1": 1.0}


@main.command()
@click.option("--scheme", "scheme_id", required=True)
@click.option("--norms", default="all", help='"all" or a pair like "inf,2".')
@click.pass_context
def gamma(ctx, scheme_id, norms):
    """Growth factors and error-bound exponents of a scheme."""
    bundle = _resolve(ctx, scheme_id)
    scheme = bundle.scheme
    if norms == "all":
        pairs = growth_mod.NORM_PAIRS
    else:
        try:
            p_txt, q_txt = [tok.strip() for tok in norms.split(",")]
            pairs = [(_NORM_NAMES[p_txt], _NORM_NAMES[q_txt])]
        except (ValueError, KeyError):
            _fail(f"cannot parse norm pair {norms!r}", 2)
    click.echo(f"scheme {scheme.id}  <{scheme.m},{scheme.k},{scheme.n}:{scheme.r}>")
    click.echo(f"{'(p,q)':>10}  {'gamma':>12}  {'log_k gamma':>12}")
    for p, q in pairs:
        g = growth_mod.growth_factor(scheme, p, q)
        expo = growth_mod.error_exponent(g, scheme.k)
        name = f"({'inf' if p == growth_mod.INF else int(p)},{'inf' if q == growth_mod.INF else int(q)})"
        click.echo(f"{name:>10}  {g:12.6g}  {expo:12.6g}")
    click.echo(f"gamma_2 = {growth_mod.gamma2(scheme):.6f}")


def _count_lines(label, counts):
    click.echo(
        f"  {label:<10} {counts.additions:4d} additions, {counts.shifts:3d} shifts,"
        f" {counts.products:3d} products  (total {counts.total})"
    )
    return counts


def _naive_for(scheme, which):
    mats = {"L": scheme.L, "R": scheme.R, "P": scheme.P}
    mat = mats[which]
    ins = [f"x{i}" for i in range(mat.shape[1])]
    outs = [f"y{i}" for i in range(mat.shape[0])]
    return slp_mod.naive_slp(mat, ins, outs)


@main.command()
@click.option("--slp", "slp_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--scheme", "scheme_id", help="Count a bundle's programs.")
@click.pass_context
def count(ctx, slp_path, scheme_id):
    """Operation counts and the recursion's leading complexity constant."""
    if bool(slp_path) == bool(scheme_id):
        _fail("give exactly one of --slp or --scheme", 2)
    if slp_path:
        try:
            program = slp_mod.load_slp(slp_path)
        except _PARSE_ERRORS as exc:
            _fail(str(exc), 2)
        _count_lines(Path(slp_path).name, slp_mod.count_ops(program))
        return
    bundle = _resolve(ctx, scheme_id)
    scheme = bundle.scheme
    if bundle.alt is not None:
        alt = bundle.alt
        click.echo(f"{bundle.id}: sparse core programs")
        core = slp_mod.OpCount()
        for label, program in (
            ("core L", alt.slp_core_l),
            ("core R", alt.slp_core_r),
            ("core P", alt.slp_core_p),
        ):
            core = core + _count_lines(label, slp_mod.count_ops(program))
        click.echo(f"  core linear total: {core.additions + core.shifts}")
        leading, expo = growth_mod.alt_complexity_constant(
            core.additions + core.shifts, scheme.r, alt.t, scheme.m
        )
        click.echo(f"  leading constant {leading} = {float(leading)}, exponent {expo:.9f}")
        click.echo("change-of-basis programs")
        cob = slp_mod.OpCount()
        for label, program in (
            ("cob L", alt.slp_cob_l),
            ("cob R", alt.slp_cob_r),
            ("cob P", alt.slp_cob_p),
        ):
            cob = cob + _count_lines(label, slp_mod.count_ops(program))
        click.echo(f"  change-of-basis linear total: {cob.additions + cob.shifts}")
        return
    click.echo(f"{bundle.id}: linear stage programs")
    total = slp_mod.OpCount()
    stages = (
        ("L", bundle.slp_l),
        ("R", bundle.slp_r),
        ("products", bundle.slp_had),
        ("P", bundle.slp_p),
    )
    for label, program in stages:
        if program is None:
            if label == "products":
                continue
            program = _naive_for(scheme, label)
            label += " (naive)"
        total = total + _count_lines(label, slp_mod.count_ops(program))
    linear_total = total.additions + total.shifts
    click.echo(f"  linear total: {linear_total}")
    if scheme.r > scheme.m * scheme.n and scheme.m == scheme.k == scheme.n:
        leading, expo = growth_mod.complexity_constant(
            linear_total, scheme.r, scheme.m, scheme.n
        )
        click.echo(f"  leading constant {leading} = {float(leading)}, exponent {expo:.9f}")


def _load_matrix(path, exact):
    if exact:
        return sms_mod.load_sms(path)
    data = np.loadtxt(path, dtype=np.float64, ndmin=2)
    return data


def _write_matrix(matrix, out, exact):
    if exact:
        text = sms_mod.dumps_sms(matrix)
    else:
        rows = [" ".join(f"{v:.17g}" for v in row) for row in np.asarray(matrix)]
        text = "\n".join(rows) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command(name="multiply")
@click.option("--scheme", "scheme_id", required=True)
@click.option("--a", "a_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--b", "b_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--levels", type=int, default=None, help="Recursion depth (default: auto).")
@click.option("--threshold", type=int, default=None, help="Base-case size bound.")
@click.option("--exact", is_flag=True, help="Exact dyadic elements; SMS matrix files.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def multiply_cmd(ctx, scheme_id, a_path, b_path, levels, threshold, exact, out):
    """Multiply two matrix files with a scheme (alt bundles use the
    alternative-basis recursion); floats use whitespace matrix files."""
    bundle = _resolve(ctx, scheme_id)
    try:
        A = _load_matrix(a_path, exact)
        B = _load_matrix(b_path, exact)
        plan = RecursionPlan(levels=levels, base_threshold=threshold)
    except _PARSE_ERRORS as exc:
        _fail(str(exc), 2)
    try:
        if bundle.alt is not None:
            C = multiply_alt(bundle, A, B, plan)
        else:
            C = multiply(bundle, A, B, plan)
    except ValueError as exc:
        _fail(str(exc), 2)
    _write_matrix(C, out, exact)


@main.command(name="bench")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--sizes", help="Comma-separated sizes, e.g. 64,128,256.")
@click.option("--schemes", help="Comma-separated scheme ids (classical for cubic).")
@click.option("--seed", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--distribution", type=click.Choice(["normal", "uniform"]), default=None)
@click.option("--reference", type=click.Choice(["exact", "dd"]), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default="bench.csv")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--figure", type=click.Path(dir_okay=False), default=None,
              help="Figure file (default: next to --out; '-' disables).")
@click.option("--gnuplot", type=click.Path(dir_okay=False), default=None,
              help="Also write a gnuplot script here.")
@click.option("--progress/--no-progress", default=True)
@click.pass_context
def bench_cmd(ctx, config_path, sizes, schemes, seed, trials, distribution,
              reference, out, fmt, figure, gnuplot, progress):
    """Accuracy benchmark; writes delimited records and a figure."""
    try:
        cfg = (
            bench_mod.BenchConfig.from_json(Path(config_path).read_text())
            if config_path
            else bench_mod.BenchConfig()
        )
        overrides = {}
        if sizes:
            overrides["sizes"] = tuple(int(tok) for tok in sizes.split(","))
        if schemes:
            overrides["schemes"] = tuple(tok.strip() for tok in schemes.split(","))
        for name, value in (
            ("seed", seed),
            ("trials", trials),
            ("distribution", distribution),
            ("reference", reference),
        ):
            if value is not None:
                overrides[name] = value
        if overrides:
            from dataclasses import replace

            cfg = replace(cfg, **overrides)
    except _PARSE_ERRORS as exc:
        _fail(str(exc), 2)

    callback = None
    if progress:
        def callback(rec):
            click.echo(
                f"  {rec.scheme:<16} n={rec.n:<4} trial={rec.trial} "
                f"max_err={rec.max_err:.3e} ({rec.elapsed:.2f}s)",
                err=True,
            )

    records = bench_mod.run_bench(cfg, ctx.obj["dirs"], on_progress=callback)
    if fmt == "csv":
        bench_mod.write_csv(records, out)
    else:
        bench_mod.write_json(records, out)
    click.echo(f"wrote {len(records)} records to {out}", err=True)
    if figure != "-":
        figure = figure or str(Path(out).with_suffix(".png"))
        bench_mod.render_figure(records, figure)
        click.echo(f"wrote figure to {figure}", err=True)
    if gnuplot:
        bench_mod.write_plot_script(records, gnuplot)
        click.echo(f"wrote gnuplot script to {gnuplot}", err=True)


@main.command(name="slp-verify")
@click.option("--slp", "slp_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--matrix", "matrix_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--scheme", "scheme_id", help="Verify a builtin bundle's programs instead.")
@click.option("--part", type=click.Choice(["L", "R", "P"]), default=None)
@click.pass_context
def slp_verify(ctx, slp_path, matrix_path, scheme_id, part):
    """Check that a linear program computes exactly a given matrix."""
    try:
        if scheme_id:
            bundle = _resolve(ctx, scheme_id)
            if part is None:
                _fail("--scheme needs --part L|R|P", 2)
            program = {"L": bundle.slp_l, "R": bundle.slp_r, "P": bundle.slp_p}[part]
            if program is None:
                _fail(f"bundle {scheme_id} has no {part} program", 2)
            matrix = {"L": bundle.scheme.L, "R": bundle.scheme.R, "P": bundle.scheme.P}[part]
        else:
            if not (slp_path and matrix_path):
                _fail("give --slp and --matrix, or --scheme and --part", 2)
            program = slp_mod.load_slp(slp_path)
            matrix = sms_mod.load_sms(matrix_path)
    except _PARSE_ERRORS as exc:
        _fail(str(exc), 2)
    if slp_mod.verify_slp(program, matrix):
        click.echo("program matches matrix exactly")
        sys.exit(0)
    click.echo("MISMATCH: program does not compute the matrix", err=True)
    sys.exit(1)


if __name__ == "__main__":
    main()
