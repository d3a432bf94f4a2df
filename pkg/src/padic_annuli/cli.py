"""Command-line entry point.

Exit codes: 0 success, 1 Inconclusive verdict, 2 error (bad input or a refused precondition).
"""
from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import click

from . import corpus as corpus_mod
from .diff_module import DiffModule
from .exponent import DegenerateResolventError, RobbaError, exponent_digits, sigma_unipotent_check
from .frobenius import (
    AntecedentError,
    PreconditionError,
    antecedent,
    pullback_identity_holds,
    pullback_residual,
    verify_antecedent_radius,
)
from .io import ModuleFileError, dumps_json, dumps_module, module_to_dict, read_module
from .padic_core import INF, format_rational, parse_rational
from .radius_profile import Inconclusive, check_shape, classify, grid_for, sample_profile
from .relative import cut_experiment, specialize

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2


class CliError(click.ClickException):
    exit_code = EXIT_ERROR


def _rationals(text: Optional[str], what: str) -> Optional[List[Fraction]]:
    if text is None:
        return None
    try:
        return [parse_rational(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"bad {what} list {text!r}: {exc}")


def _load(path: str) -> DiffModule:
    try:
        return read_module(path)
    except FileNotFoundError:
        raise CliError(f"{path}: no such file")
    except ModuleFileError as exc:
        raise CliError(f"{path}: {exc}")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _grid(M: DiffModule, grid_text: Optional[str]) -> List[Fraction]:
    grid = _rationals(grid_text, "grid")
    return grid_for(M, grid)


def _profile(ctx, M, grid_text, n):
    try:
        return sample_profile(M, _grid(M, grid_text), n, seed=ctx.obj["seed"])
    except ValueError as exc:
        raise CliError(str(exc))


n_option = click.option("--n", "n", type=int, default=None, envvar="PADIC_N", show_envvar=True,
                         help="Truncation order N for derivative powers (default max(p^3, 4 mu p)).")
grid_option = click.option("--grid", default=None, metavar="r1,r2,...",
                           help="Comma-separated radii r (rho = p^-r); default 1/2,...,1/64 inside the interval.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--seed", type=int, default=0, envvar="PADIC_SEED", show_envvar=True,
              help="Seed for the cyclic-vector search.")
@click.pass_context
def main(ctx, seed):
    """Radii, breaks, antecedents and exponents of p-adic differential modules on annuli."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed


@main.command()
@click.argument("file")
@grid_option
@n_option
@click.option("--csv", "csv_out", default=None, metavar="PATH", help="Write the CSV here instead of stdout.")
@click.option("--plot", "plot_out", default=None, metavar="PATH", help="Also render the profile as an image.")
@click.pass_context
def radius(ctx, file, grid, n, csv_out, plot_out):
    """Sampled radius profile f(r) as CSV."""
    M = _load(file)
    prof = _profile(ctx, M, grid, n)
    _emit(prof.to_csv(), csv_out)
    if plot_out:
        from .plotting import plot_profile
        plot_profile(prof, plot_out, title=Path(file).stem)


@main.command(name="break")
@click.argument("file")
@grid_option
@n_option
@click.pass_context
def break_(ctx, file, grid, n):
    """Break verdict JSON: Solvable{b}, NotSolvable{q} or Inconclusive."""
    M = _load(file)
    verdict = classify(_profile(ctx, M, grid, n))
    click.echo(dumps_json(verdict.to_json()), nl=False)
    if isinstance(verdict, Inconclusive):
        ctx.exit(EXIT_INCONCLUSIVE)


@main.command()
@click.argument("file")
@click.option("--outdir", required=True, metavar="DIR", help="Directory for profile.csv, report.json and profile.png.")
@grid_option
@n_option
@click.pass_context
def report(ctx, file, outdir, grid, n):
    """Profile CSV, verdict and shape JSON, and a figure, written to one directory."""
    from .plotting import plot_profile
    M = _load(file)
    prof = _profile(ctx, M, grid, n)
    verdict = classify(prof)
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "profile.csv").write_text(prof.to_csv())
    (out / "report.json").write_text(dumps_json({
        "module": Path(file).name, "profile": prof.to_json(),
        "verdict": verdict.to_json(), "shape": check_shape(prof).to_json()}))
    plot_profile(prof, out / "profile.png", title=Path(file).stem)
    click.echo(dumps_json({"outdir": str(out), "files": ["profile.csv", "report.json", "profile.png"],
                           "verdict": verdict.to_json()}), nl=False)
    if isinstance(verdict, Inconclusive):
        ctx.exit(EXIT_INCONCLUSIVE)


@main.command(name="antecedent")
@click.argument("file")
@click.option("--out", default=None, metavar="PATH", help="Write the antecedent module file here.")
@n_option
@click.pass_context
def antecedent_cmd(ctx, file, out, n):
    """Frobenius antecedent F with F pulled back isomorphic to M, plus a verification report."""
    M = _load(file)
    try:
        ant = antecedent(M)
    except (PreconditionError, AntecedentError) as exc:
        raise CliError(str(exc))
    grid = grid_for(M, None)[-3:]
    law = verify_antecedent_radius(M, ant.F, grid, n)
    res = pullback_residual(M, ant)
    rep = {"pullback_exact": pullback_identity_holds(M, ant),
           "pullback_residual_valuation": "inf" if res == INF else format_rational(res),
           "radius_law": law.to_json(), "n_max": ant.n_max}
    if out:
        Path(out).write_text(dumps_module(ant.F))
        rep["module_file"] = out
    else:
        rep["module"] = module_to_dict(ant.F)
    click.echo(dumps_json(rep), nl=False)


@main.command()
@click.argument("file")
@click.option("--height", "H", type=int, default=2, show_default=True, help="Number of p-adic digits.")
@click.option("--r0", default=None, help="Radius at which |det S| is compared (default: interval midpoint).")
def exponent(file, H, r0):
    """Exponent candidate Delta mod p^H as JSON."""
    M = _load(file)
    try:
        cand = exponent_digits(M, None if r0 is None else parse_rational(r0), H)
    except (RobbaError, DegenerateResolventError, ValueError) as exc:
        raise CliError(str(exc))
    click.echo(dumps_json(cand.to_json()), nl=False)


@main.command(name="check-sigma")
@click.argument("file")
@click.option("--sigma", required=True, metavar="x1,x2,...", help="Comma-separated rationals forming Sigma.")
@click.option("--height", "H", type=int, default=2, show_default=True)
@click.option("--shift-bound", type=int, default=None, help="Largest integer shift allowed (default: height).")
@n_option
def check_sigma(file, sigma, H, shift_bound, n):
    """Sigma-unipotence verdict (true, false or null when undetermined)."""
    M = _load(file)
    v = sigma_unipotent_check(M, _rationals(sigma, "sigma"), H, shift_bound=shift_bound, N=n)
    click.echo(dumps_json(v.to_json()), nl=False)
    if v.value is None:
        sys.exit(EXIT_INCONCLUSIVE)


@main.command(name="specialize")
@click.argument("file")
@click.option("--point", required=True, type=int, help="Integer a to substitute for z.")
@click.option("--out", default=None, metavar="PATH")
def specialize_cmd(file, point, out):
    """Fiber module at z = a."""
    E = _load(file)
    _emit(dumps_module(specialize(E, point)), out)


@main.command(name="cut-report")
@click.argument("file")
@click.option("--points", required=True, metavar="a1,a2,...", help="Pairwise distinct integers.")
@click.option("--sigma", default=None, metavar="x1,x2,...", help="If given, also compare exponents.")
@click.option("--height", "H", type=int, default=2, show_default=True)
@grid_option
@n_option
def cut_report(file, points, sigma, H, grid, n):
    """Specialize at many points and compare with the generic fiber."""
    E = _load(file)
    try:
        pts = [int(x) for x in points.split(",") if x.strip()]
        rep = cut_experiment(E, pts, _rationals(sigma, "sigma"), H, _rationals(grid, "grid"), n)
    except ValueError as exc:
        raise CliError(str(exc))
    click.echo(dumps_json(rep.to_json()), nl=False)
    if rep.generic.verdict.kind == "Inconclusive":
        sys.exit(EXIT_INCONCLUSIVE)


@main.group()
def corpus():
    """Named example modules."""


@corpus.command(name="list")
def corpus_list():
    for name in sorted(corpus_mod.CORPUS):
        click.echo(f"{name}\t{corpus_mod.DESCRIPTIONS[name]}")


@corpus.command(name="emit")
@click.argument("name")
@click.option("--p", "p", type=int, default=3, show_default=True)
@click.option("--xi", default=None, help="Exponent for m_xi and rel_const_exponent.")
@click.option("--out", default=None, metavar="PATH")
def corpus_emit(name, p, xi, out):
    """Write the module-description file of a corpus entry."""
    try:
        M = corpus_mod.build(name, p, None if xi is None else parse_rational(xi))
    except (KeyError, ValueError) as exc:
        raise CliError(str(exc))
    _emit(dumps_module(M), out)


if __name__ == "__main__":  # pragma: no cover
    main()
