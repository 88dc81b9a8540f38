"""Command-line interface

Exit codes: 0 success, 1 domain failure (invalid pattern, refused
certificate, FAIL verdict, singular strut matrix), 2 input error.
"""

import functools
import hashlib
import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple

import click
from pydantic import ValidationError

from app import __version__
from app.config import get_settings
from app.errors import InputError, PatternError, TreeclaspError
from app.models.schemas import (
    CertificateModel,
    LeggedSeriesModel,
    PatternModel,
    RunReport,
    StageModel,
    SurgeryPresentationModel,
    VerdictModel,
    ZminReportModel,
)
from app.services import aarhus
from app.services.calculator import ClasperCalculator, dump

logger = logging.getLogger(__name__)


def _load(path: str) -> Tuple[dict, str]:
    raw = Path(path).read_bytes()
    digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return data, digest


def _load_pattern(path: str, n: Optional[int]) -> Tuple[PatternModel, str]:
    """A pattern document, or a bare tree document taken as one"""
    data, digest = _load(path)
    if "tree" not in data:
        data = {"tree": data}
    model = PatternModel.model_validate(data)
    if n is not None:
        model = model.model_copy(update={"n": n or None})
    return model, digest


def handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return f(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: invalid input: {exc}", err=True)
            ctx.exit(2)
        except TreeclaspError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)

    return wrapper


def _emit(report: RunReport, human: str, out: Optional[str] = None, ok: bool = True):
    ctx = click.get_current_context()
    if out:
        Path(out).write_text(json.dumps(report.output, indent=2) + "\n")
        logger.info("wrote %s", out)
    if ctx.obj["json"]:
        click.echo(report.model_dump_json(by_alias=True, indent=2))
    else:
        click.echo(human)
    ctx.exit(0 if ok else 1)


@click.group()
@click.version_option(__version__, prog_name="treeclasp")
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG logging")
@click.option("--json", "as_json", is_flag=True, help="Print a machine-readable run report")
@click.option("--max-degree", type=int, default=None, help="Override the tree degree guard")
@click.option("--max-legs", type=int, default=None, help="Override the X-leg guards of glue and brute_glue")
@click.pass_context
def cli(ctx, verbose, as_json, max_degree, max_legs):
    """Tree diagrams, claspers and tree-level gluing."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    settings = get_settings().override(max_degree=max_degree, max_x_legs=max_legs, max_brute_legs=max_legs)
    ctx.obj = {"json": as_json, "calculator": ClasperCalculator(settings)}


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "n", type=int, default=None, help="Validate as an n-pattern")
@click.pass_context
@handle_errors
def validate(ctx, file, n):
    """Check that FILE holds a pattern (or an n-pattern)."""
    model, digest = _load_pattern(file, n)
    try:
        report = ctx.obj["calculator"].validate(model)
    except PatternError as exc:
        verdict = VerdictModel(operation="validate", check=str(exc), passed=False)
        run = RunReport(command="validate", input_digest=digest, verdicts=[verdict])
        _emit(run, f"invalid: {exc}", ok=False)
        return
    kind = report.kind
    where = f"edge {report.edge}" if report.n else f"vertex {report.vertex}"
    check = f"{kind} of degree {report.degree} at {where}"
    run = RunReport(
        command="validate",
        input_digest=digest,
        verdicts=[VerdictModel(operation="validate", check=check, passed=True)],
        output=dump(report),
    )
    human = "\n".join([f"valid {check}"] + [f"  branch {b}" for b in report.branches])
    _emit(run, human)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "n", type=int, default=None, help="Build the n-clasper and its degree-one reduction")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the presentation JSON here")
@click.option("--allow-non-null", is_flag=True, help="Accept leaves that are not null-homologous")
@click.pass_context
@handle_errors
def build(ctx, file, n, out, allow_non_null):
    """Compile the clasper of a pattern into a surgery presentation."""
    model, digest = _load_pattern(file, n)
    presentation = ctx.obj["calculator"].build(model, allow_non_null)
    run = RunReport(
        command="build",
        input_digest=digest,
        certificates=presentation.certificates,
        output=dump(presentation),
    )
    lines = [f"{len(presentation.curves)} curves, {len(presentation.arms)} arms"]
    lines += [f"  {c.label} ({c.kind}) {c.word} framing {c.framing}" for c in presentation.curves]
    for cert in presentation.certificates:
        lines.append(f"certificate level {cert.level}: {'granted' if cert.granted else 'refused'}")
    if presentation.reduced is not None:
        lines.append(f"reduced degree-{presentation.reduced.degree} spec included")
    _emit(run, "\n".join(lines), out)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "level", type=int, default=1, show_default=True, help="Derived series level")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@handle_errors
def certify(ctx, file, level, out):
    """Certify the leaves of a surgery presentation null at level n."""
    data, digest = _load(file)
    presentation = SurgeryPresentationModel.model_validate(data)
    cert = ctx.obj["calculator"].certify(presentation, level)
    run = RunReport(command="certify", input_digest=digest, certificates=[cert], output=dump(cert))
    lines = [f"  {c.leaf} {c.word}: {c.check} {'ok' if c.passed else 'failed'}" for c in cert.checks]
    _emit(run, "\n".join([f"certificate level {level} granted"] + lines), out)


def _vector_lines(vector) -> List[str]:
    return [f"  {term.coeff} * {term.tree.text}" for term in vector.terms]


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--n", "n", type=int, default=None, help="Treat the input as an n-pattern")
@click.option("--cap", type=int, default=None, help="Highest degree computed (default: the pattern degree)")
@click.option("--route", type=click.Choice(["reduce", "expand"]), default="reduce", show_default=True)
@click.option("--oracle", is_flag=True, help="Also run the all-matchings gluing and the arm filter")
@click.option("--sign", "show_sign", is_flag=True, help="Print the global sign convention")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@handle_errors
def zmin(ctx, file, n, cap, route, oracle, show_sign, out):
    """Lowest-degree tree part of the glued invariant, checked against the pattern."""
    model, digest = _load_pattern(file, n)
    report = ctx.obj["calculator"].zmin(model, cap, route, oracle)
    out_model = ZminReportModel.from_report(report)
    verdicts = [
        VerdictModel(
            operation="zmin",
            check=f"lowest nonvanishing degree {report.min_degree} equals +/- the pattern at degree {report.target.degree}",
            passed=report.passed,
        )
    ]
    if oracle:
        verdicts.append(VerdictModel(operation="brute_glue", check="oracle agrees", passed=bool(report.oracle_agrees)))
        verdicts.append(
            VerdictModel(operation="arm_filtered_glue", check="filter agrees", passed=bool(report.filtered_agrees))
        )
    run = RunReport(
        command="zmin",
        input_digest=digest,
        stages=[StageModel(name=name, seconds=seconds) for name, seconds in report.stages],
        certificates=[CertificateModel.from_certificate(report.certificate)],
        verdicts=verdicts,
        output=dump(out_model),
    )
    lines = [f"min degree: {report.min_degree}"]
    low = out_model.result.per_degree.get(str(report.min_degree))
    if low is not None:
        lines += _vector_lines(low)
    lines.append(f"matched sign: {out_model.matched_sign or 'none'}")
    if show_sign:
        lines.append(f"sign convention: {aarhus.SIGN_CONVENTION}")
    if oracle:
        lines.append("oracle agrees" if report.oracle_agrees else "oracle DISAGREES")
        lines.append("filter agrees" if report.filtered_agrees else "filter DISAGREES")
    lines.append(out_model.verdict)
    ok = report.passed and (not oracle or (report.oracle_agrees and report.filtered_agrees))
    _emit(run, "\n".join(lines), out, ok)


@cli.command()
@click.option("--degree", type=int, required=True)
@click.option("--colors", type=int, required=True)
@click.pass_context
@handle_errors
def dim(ctx, degree, colors):
    """Dimension of the degree-m tree space on r colors."""
    result = ctx.obj["calculator"].calculate_dim(degree, colors)
    run = RunReport(command="dim", output=result)
    _emit(run, str(result["dim"]))


@cli.command()
@click.option("--word", required=True, help='e.g. "[x1,x2]" or "x1 x2 x1^-1"')
@click.option("--cap", type=int, default=3, show_default=True)
@click.option("--r", "r", type=int, default=None, help="Rank of the free group")
@click.option("--tree", "as_tree", is_flag=True, help="Print the rooted tree expansion instead")
@click.pass_context
@handle_errors
def magnus(ctx, word, cap, r, as_tree):
    """Magnus expansion of a free group word."""
    calculator = ctx.obj["calculator"]
    if as_tree:
        result = calculator.calculate_tree_expansion(word, cap)
        terms = result["expansion"]["terms"]
        human = "\n".join(f"{t['coeff']} * {t['tree']['text']}" for t in terms) or "0"
    else:
        result = calculator.calculate_word(word, r, cap)
        human = result["magnus"]
    _emit(RunReport(command="magnus", output=result), human)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--brute", is_flag=True, help="Use the all-matchings oracle")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@handle_errors
def glue(ctx, file, brute, out):
    """Glue the X legs of a legged series file."""
    data, digest = _load(file)
    series = LeggedSeriesModel.model_validate(data)
    result = ctx.obj["calculator"].glue(series, brute)
    run = RunReport(command="glue", input_digest=digest, output=dump(result))
    lines = [f"min degree: {result.min_degree}"] + _vector_lines(result.value)
    if result.forests:
        lines.append(f"{len(result.forests)} disconnected forest terms")
    _emit(run, "\n".join(lines), out)


@cli.command()
@click.option("--degree", type=int, required=True)
@click.option("--colors", type=int, required=True)
@click.option("--n", "n", type=int, default=None)
@click.pass_context
@handle_errors
def catalog(ctx, degree, colors, n):
    """List the patterns of a degree, one per canonical form."""
    result = ctx.obj["calculator"].catalog(degree, colors, n)
    _emit(RunReport(command="catalog", output=result), "\n".join(result["patterns"]) or "none")


def main():
    cli(prog_name="treeclasp")
