"""CLI entry point for latininf.

Human-readable status goes to stderr through rich; machine output (JSON
reports, CSV windows) goes to stdout. Exit codes: 0 success, 1 a failed
verification or an extension the builder could not make, 2 bad input.
"""

import json
import logging
from contextlib import contextmanager
from pathlib import Path

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from latininf.errors import ExtensionFailed, VerifyFailed
from latininf.models import BuildLog, RunConfig
from latininf.store import default_path, dumps
from latininf.utils.constants import (
    BRUTE_FORCE_CAP, DEFAULT_JOBS, DEFAULT_TOL, FAMILY_MAX_GROWTH, INDEX_KINDS,
    MAPPING_MAX_GROWTH, TERRACE_KINDS, TERRACE_MAX_GROWTH,
)
from latininf.utils.formatting import format_count, format_rational, format_verdict, parse_rational

console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXIT_FAIL = 1
EXIT_USAGE = 2


@contextmanager
def _guard():
    """Print domain errors and turn them into exit codes."""
    try:
        yield
    except (ExtensionFailed, VerifyFailed) as e:
        console.print(f"[red][ERROR][/red] {e}")
        raise SystemExit(EXIT_FAIL)
    except (ValueError, FileNotFoundError) as e:
        console.print(f"[red][ERROR][/red] {e}")
        raise SystemExit(EXIT_USAGE)


def _emit(doc: dict) -> None:
    click.echo(dumps(doc), nl=False)


def _finish(report) -> None:
    """Emit a report as JSON; exit 1 when it failed."""
    _emit(report.to_dict())
    console.print(f"{report.property}: {format_verdict(report.passed)}")
    if not report.passed:
        raise SystemExit(EXIT_FAIL)


def _summary(title: str, rows: list[tuple[str, str]]) -> None:
    table = Table(title=title)
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right")
    for name, value in rows:
        table.add_row(name, value)
    console.print(table)


# ─── Root command group ──────────────────────────────────────────────

@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log every scheduler step")
@click.option("--jobs", type=click.IntRange(min=1), default=DEFAULT_JOBS, show_default=True,
              envvar="LATININF_JOBS", help="Worker processes for brute-force verifiers")
@click.pass_context
def cli(ctx, verbose, jobs):
    """latininf - infinite Latin squares, terraces and strong complete mappings"""
    pkg_logger = logging.getLogger("latininf")
    pkg_logger.handlers[:] = [RichHandler(console=console, show_path=False)]
    pkg_logger.setLevel(logging.DEBUG if verbose else logging.WARNING)
    ctx.ensure_object(dict)
    ctx.obj["jobs"] = jobs


# ─── builders ────────────────────────────────────────────────────────

def _resume(path, kind: str):
    """(state, cursor, log, document) from --resume, or empties."""
    if path is None:
        return None, 0, BuildLog(), {}
    from latininf.store import load_artifact
    state, cursor, log, doc = load_artifact(path, kind)
    console.print(f"[dim]Resuming {kind} from {path} at cursor {cursor}[/dim]")
    return state, cursor, log, doc


def _build(kind: str, title: str, state, stream, steps: int, cursor: int, log: BuildLog,
           verify_each: bool, growth_bound, out: Path, params: dict | None = None) -> None:
    from latininf.services.scheduler_service import run
    from latininf.store import save_artifact

    state, fresh = run(state, stream, steps, verify_each=verify_each, start=cursor,
                       growth_bound=growth_bound)
    log.extend(fresh)
    cursor += len(fresh)
    report = state.check()
    path = None
    if report.passed:
        extra = {"params": params} if params is not None else None
        path = save_artifact(out, kind, state, cursor=cursor, log=log, extra=extra)
    _summary(title, [
        ("Steps run", format_count(len(fresh))),
        ("Cursor", format_count(cursor)),
        ("Size", format_count(state.size())),
        ("Max growth", str(fresh.max_growth)),
        ("Already satisfied", format_count(fresh.satisfied_count)),
        ("Check", format_verdict(report.passed)),
    ])
    _emit({
        "artifact": str(path) if path else None,
        "kind": kind,
        "cursor": cursor,
        "steps_run": len(fresh),
        "size": state.size(),
        "max_growth": fresh.max_growth,
        "check": report.to_dict(),
    })
    if path is None:
        raise SystemExit(EXIT_FAIL)
    console.print(f"[green][OK][/green] {kind} saved to {path}")


@cli.command("build-terrace")
@click.option("--group", "group_spec", default="Z", show_default=True,
              help="Group descriptor: Z, Q, E2, sum(...)")
@click.option("--index", "index_kind", default="Z", show_default=True,
              type=click.Choice(sorted(INDEX_KINDS), case_sensitive=False))
@click.option("--kind", default="T", show_default=True,
              type=click.Choice(sorted(TERRACE_KINDS), case_sensitive=False))
@click.option("--steps", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--max-distance", default=None, help="Only meet sequencing targets with d <= this")
@click.option("--verify-each", is_flag=True, help="Run the full checker after every step")
@click.option("--resume", "resume_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Continue a saved terrace (group, index, kind come from the artifact)")
@click.option("--out", default=None, help="Artifact path (default: under LATININF_HOME)")
@click.pass_context
def build_terrace(ctx, group_spec, index_kind, kind, steps, max_distance, verify_each,
                  resume_path, out):
    """Greedy directed T / S / R terrace over an infinite group."""
    from latininf.groups import parse_group
    from latininf.index import parse_index
    from latininf.services.terrace_service import PartialTerrace, requirement_stream

    with _guard():
        RunConfig("build-terrace", group_spec, index_kind, steps, out, jobs=ctx.obj["jobs"]).validate()
        state, cursor, log, doc = _resume(resume_path, "terrace")
        if state is None:
            state = PartialTerrace(parse_group(group_spec), parse_index(index_kind), kind)
            if max_distance is not None:
                max_distance = format_rational(parse_rational(max_distance))
        else:
            max_distance = doc.get("params", {}).get("max_distance")
        if out is None:
            out = default_path("terrace", state.group.descriptor, state.index.kind, state.kind)
        stream = requirement_stream(state, max_distance)
        _build("terrace", f"{state.kind}-terrace over {state.group.descriptor}", state, stream,
               steps, cursor, log, verify_each, TERRACE_MAX_GROWTH, out,
               {"max_distance": max_distance})


@cli.command("build-nonrowcomplete")
@click.option("--steps", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--verify-each", is_flag=True, help="Run the full checker after every step")
@click.option("--resume", "resume_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default=None, help="Artifact path (default: under LATININF_HOME)")
def build_nonrowcomplete(steps, verify_each, resume_path, out):
    """Latin square on N that no column permutation makes row complete."""
    from latininf.services.construct_service import (
        rowcomplete_stream, seed_rowcomplete, step_growth_bound,
    )

    with _guard():
        state, cursor, log, _ = _resume(resume_path, "immune-region")
        state = state if state is not None else seed_rowcomplete()
        _build("immune-region", "Non-row-completable region", state, rowcomplete_stream(),
               steps, cursor, log, verify_each, step_growth_bound,
               out or default_path("immune-region"))


@cli.command("build-nongroup-vatican")
@click.option("--steps", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--semi", is_flag=True, help="Unordered pairs (semi-Vatican)")
@click.option("--verify-each", is_flag=True, help="Run the full checker after every step")
@click.option("--resume", "resume_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default=None, help="Artifact path (default: under LATININF_HOME)")
def build_nongroup_vatican(steps, semi, verify_each, resume_path, out):
    """Vatican square on N that breaks the quadrangle criterion."""
    from latininf.services.construct_service import seed_vatican, vatican_stream

    with _guard():
        state, cursor, log, _ = _resume(resume_path, "vatican-region")
        state = state if state is not None else seed_vatican(semi)
        label = "semivatican" if state.semi else "vatican"
        _build("vatican-region", f"Non-group {label} region", state, vatican_stream(state.semi),
               steps, cursor, log, verify_each, 2,
               out or default_path("vatican-region", label))


@cli.command()
@click.option("--group", "group_spec", default="Z", show_default=True)
@click.option("--k", "size", type=click.IntRange(min=1), default=2, show_default=True,
              help="Number of mutually orthogonal orthomorphisms")
@click.option("--steps", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--verify-each", is_flag=True, help="Run the full checker after every step")
@click.option("--resume", "resume_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default=None, help="Artifact path (default: under LATININF_HOME)")
@click.pass_context
def moo(ctx, group_spec, size, steps, verify_each, resume_path, out):
    """Greedy family of k mutually orthogonal orthomorphisms."""
    from latininf.groups import parse_group
    from latininf.services.ortho_service import OrthomorphismFamily, moo_stream

    with _guard():
        RunConfig("moo", group_spec, None, steps, out, jobs=ctx.obj["jobs"]).validate()
        state, cursor, log, _ = _resume(resume_path, "family")
        if state is None:
            group = parse_group(group_spec)
            if group.is_finite:
                raise ValueError(f"{group.descriptor} is finite; the greedy family needs an infinite group")
            state = OrthomorphismFamily(group, size)
        _build("family", f"{state.k} MOO over {state.group.descriptor}", state, moo_stream(state),
               steps, cursor, log, verify_each, FAMILY_MAX_GROWTH,
               out or default_path("family", state.group.descriptor, state.k))


@cli.command()
@click.argument("artifacts", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
def orthocheck(artifacts):
    """Mutual orthogonality of saved mappings and families.

    Every orthomorphism of a family artifact counts as one mapping; a single
    family is enough, single mappings need a partner.
    """
    from latininf.services.ortho_service import verify_mutually_orthogonal
    from latininf.store import load_artifact

    with _guard():
        mappings = []
        for path in artifacts:
            kind = _artifact_kind(path)
            if kind == "family":
                family = load_artifact(path, "family")[0]
                mappings.extend(family.mapping(i) for i in range(family.k))
            elif kind == "mapping":
                mappings.append(load_artifact(path, "mapping")[0])
            else:
                raise ValueError(f"{path} is not a mapping or family artifact")
        if len(mappings) < 2:
            raise ValueError("orthogonality needs at least two mappings")
        report = verify_mutually_orthogonal(mappings)
    _finish(report)


# ─── scm commands ────────────────────────────────────────────────────

@cli.group()
def scm():
    """Strong complete mappings: greedy, cyclic, field block, compositions."""
    pass


def _certificate_out(cert, out) -> None:
    if out is not None:
        from latininf.store import save_artifact
        path = save_artifact(out, "mapping", cert.mapping,
                             extra={"transcript": cert.transcript.to_dict()})
        console.print(f"[green][OK][/green] certificate saved to {path}")
    console.print(f"SCM of {cert.group.descriptor}: {format_verdict(cert.transcript.passed)}")
    _emit(cert.to_dict())


@scm.command("greedy")
@click.option("--group", "group_spec", default="Z", show_default=True)
@click.option("--steps", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--verify-each", is_flag=True, help="Run the full checker after every step")
@click.option("--resume", "resume_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", default=None, help="Artifact path (default: under LATININF_HOME)")
@click.pass_context
def scm_greedy(ctx, group_spec, steps, verify_each, resume_path, out):
    """Partial SCM over a squareful infinite group."""
    from latininf.errors import NotSquareful, UnsupportedGroup
    from latininf.groups import parse_group
    from latininf.services.ortho_service import STRONG, PartialMapping, scm_stream
    from latininf.utils.constants import SQUAREFUL

    with _guard():
        RunConfig("scm", group_spec, None, steps, out, jobs=ctx.obj["jobs"]).validate()
        state, cursor, log, _ = _resume(resume_path, "mapping")
        if state is None:
            group = parse_group(group_spec)
            if group.is_finite:
                raise UnsupportedGroup(f"{group.descriptor} is finite; use `scm cyclic` or `oracle bruteforce-scm`")
            if group.classification != SQUAREFUL:
                raise NotSquareful(f"{group.descriptor} is {group.classification}, not squareful")
            state = PartialMapping(group, STRONG)
        _build("mapping", f"Partial SCM over {state.group.descriptor}", state,
               scm_stream(state.group), steps, cursor, log, verify_each, MAPPING_MAX_GROWTH,
               out or default_path("mapping", state.group.descriptor))


@scm.command("cyclic")
@click.argument("n", type=int)
@click.option("--out", default=None, help="Save the certificate as a mapping artifact")
def scm_cyclic_cmd(n, out):
    """x -> 2x on Z_n (needs gcd(n, 6) = 1)."""
    from latininf.services.ortho_service import scm_cyclic

    with _guard():
        _certificate_out(scm_cyclic(n), out)


@scm.command("field")
@click.argument("m", type=int)
@click.option("--multiplier", "a", type=int, default=2, show_default=True)
@click.option("--out", default=None, help="Save the certificate as a mapping artifact")
def scm_field(m, a, out):
    """x -> a*x in the nim field on E2:<2^m>."""
    from latininf.services.ortho_service import scm_elementary_2group

    with _guard():
        _certificate_out(scm_elementary_2group(m, a), out)


@scm.command("product")
@click.argument("orders", nargs=-1, type=int, required=True)
@click.option("--sum", "as_sum", is_flag=True, help="Normalize parts to fix the identity")
@click.option("--out", default=None, help="Save the certificate as a mapping artifact")
def scm_product(orders, as_sum, out):
    """Direct product (or sum) of cyclic SCMs, e.g. `scm product 5 7`."""
    from latininf.services.ortho_service import scm_cyclic, scm_direct_product, scm_direct_sum

    with _guard():
        parts = [scm_cyclic(n) for n in orders]
        compose = scm_direct_sum if as_sum else scm_direct_product
        _certificate_out(compose(parts), out)


@scm.command("quotient")
@click.argument("h_order", type=int)
@click.argument("q_order", type=int)
@click.option("--out", default=None, help="Save the certificate as a mapping artifact")
def scm_quotient_cmd(h_order, q_order, out):
    """SCM of Z_{h*q} from H = <q> and G/H, e.g. `scm quotient 5 7`."""
    from latininf.services.ortho_service import scm_quotient_cyclic

    with _guard():
        _certificate_out(scm_quotient_cyclic(h_order, q_order), out)


@scm.command("criterion")
@click.argument("factors", nargs=-1, type=int, required=True)
@click.option("--check", "cross_check", is_flag=True,
              help="Cross-check against the brute-force search (order <= cap)")
@click.pass_context
def scm_criterion(ctx, factors, cross_check):
    """Does Z_{n1} x Z_{n2} x ... have an SCM? (Sylow 2 / 3 criterion)"""
    from latininf.groups import finite_abelian
    from latininf.services.ortho_service import brute_force_scm_search, scm_exists_finite_abelian

    with _guard():
        exists = scm_exists_finite_abelian(list(factors))
        doc = {"factors": list(factors), "exists": exists}
        if cross_check:
            found = brute_force_scm_search(finite_abelian(list(factors)), jobs=ctx.obj["jobs"])
            doc["search_found"] = found is not None
            doc["agree"] = (found is not None) == exists
        _emit(doc)
        console.print(f"SCM exists: {format_verdict(exists)}")
        if cross_check and not doc["agree"]:
            console.print("[red][ERROR][/red] criterion and search disagree")
            raise SystemExit(EXIT_FAIL)


# ─── knutvic / real / window ─────────────────────────────────────────

@cli.command()
@click.option("--order", "n", type=int, default=None, help="Z_n with theta(x) = multiplier*x")
@click.option("--multiplier", type=int, default=2, show_default=True)
@click.option("--mapping", "mapping_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Partial mapping artifact; checks the window over its domain")
@click.option("--size", type=click.IntRange(min=1), default=None,
              help="Use only the first SIZE domain points of --mapping")
@click.option("--out", default=None, help="Write the square as CSV")
def knutvic(n, multiplier, mapping_path, size, out):
    """Knut Vic square L(i, j) = i + theta(j) and its diagonal check."""
    from latininf.groups import CyclicGroup
    from latininf.services.ortho_service import PartialMapping, knut_vic, l_theta_window
    from latininf.services.square_service import render, verify_knutvic
    from latininf.store import load_artifact

    with _guard():
        if (n is None) == (mapping_path is None):
            raise click.UsageError("give exactly one of --order or --mapping")
        if n is not None:
            if n < 1:
                raise ValueError(f"order must be >= 1, got {n}")
            group = CyclicGroup(n)
            mapping = PartialMapping.from_function(group, lambda x: multiplier * x % n)
            region = knut_vic(mapping)
        else:
            mapping = load_artifact(mapping_path, "mapping")[0]
            group = mapping.group
            if size is not None:
                points = mapping.domain()[:size]
                region = l_theta_window(mapping, rows=points, cols=points)
            elif mapping.is_total:
                region = knut_vic(mapping)
            else:
                region = l_theta_window(mapping)
        if out:
            Path(out).write_text(render(region, "csv"), encoding="utf-8")
        _finish(verify_knutvic(region, group, full=mapping.is_total and size is None))


@cli.command()
@click.option("--probe", nargs=3, type=float, default=None, metavar="X Y D",
              help="Locate x then y at distance d")
@click.option("--direction", type=click.Choice(["row", "column"]), default="row", show_default=True)
@click.option("--window", "window_size", type=click.IntRange(min=1), default=None,
              help="Check an N x N window centred on 0")
@click.option("--spacing", type=float, default=0.25, show_default=True)
@click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True)
@click.option("--out", default=None, help="Write the window as CSV")
def real(probe, direction, window_size, spacing, tol, out):
    """The explicit semi-Vatican square on the real line."""
    from latininf.services.realline_service import (
        locate_pair, realline_window, verify_semivatican_tolerance,
    )
    from latininf.services.square_service import render

    with _guard():
        RunConfig("real", tolerance=tol).validate()
        if (probe is None) == (window_size is None):
            raise click.UsageError("give exactly one of --probe or --window")
        if probe is not None:
            x, y, d = probe
            result = locate_pair(x, y, d, tol, direction)
            _emit(result.to_dict())
            ok = all(r <= tol for r in result.residuals)
            console.print(f"probe residuals within tol: {format_verdict(ok)}")
            if not ok:
                raise SystemExit(EXIT_FAIL)
            return
        if not spacing > 0:
            raise ValueError(f"spacing must be > 0, got {spacing}")
        points = [(k - window_size // 2) * spacing for k in range(window_size)]
        region = realline_window(points, points)
        if out:
            Path(out).write_text(render(region, "csv"), encoding="utf-8")
        _finish(verify_semivatican_tolerance(region, tol))


@cli.command()
@click.argument("artifact", type=click.Path(exists=True, dir_okay=False))
@click.option("--size", type=click.IntRange(min=1), default=10, show_default=True,
              help="Terrace: first SIZE index points; mapping/family: first SIZE domain points")
@click.option("--member", type=click.IntRange(min=0), default=0, show_default=True,
              help="Which mapping of a family artifact")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", default=None, help="Write to a file instead of stdout")
def window(artifact, size, member, fmt, out):
    """Finite window of a saved terrace (Cayley) or mapping (L_theta)."""
    from latininf.index import Window
    from latininf.services.ortho_service import l_theta_window
    from latininf.services.square_service import cayley_window, render
    from latininf.store import load_artifact

    with _guard():
        state, _, _, doc = load_artifact(artifact)
        kind = doc["artifact"]
        if kind == "terrace":
            w = Window.first(state.index, size)
            region = cayley_window(state, w.rows, w.cols)
        elif kind in ("mapping", "family"):
            mapping = state.mapping(member) if kind == "family" else state
            points = mapping.domain()[:size]
            region = l_theta_window(mapping, rows=points, cols=points)
        elif kind in ("immune-region", "vatican-region"):
            region = state.region
        else:
            raise ValueError(f"no window for a {kind} artifact")
        text = render(region, fmt)
        if out:
            Path(out).write_text(text, encoding="utf-8")
            console.print(f"[green][OK][/green] {len(region):,} cells written to {out}")
        else:
            click.echo(text, nl=False)


# ─── verify commands ─────────────────────────────────────────────────

def _artifact_kind(path: str) -> str | None:
    """The artifact kind of a JSON file, or None for CSV and bare region JSON."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        return None
    doc = json.loads(p.read_text(encoding="utf-8"))
    return doc.get("artifact") if isinstance(doc, dict) and "format_version" in doc else None


def _load_region(path: str, symbols: str, coords: str):
    from latininf.importers.region_csv import parse_region_csv
    from latininf.services.square_service import LatinRegion, parse_region
    from latininf.store import load_artifact

    p = Path(path)
    if p.suffix.lower() == ".csv":
        return parse_region_csv(p, symbols=symbols, coords=coords)
    text = p.read_text(encoding="utf-8")
    if _artifact_kind(path) is not None:
        state = load_artifact(p)[0]
        region = getattr(state, "region", state)
        if not isinstance(region, LatinRegion):
            raise ValueError(f"{path} holds no region; extract one with `window` first")
        return region
    return parse_region(text, "json", symbols, coords)


def _region_options(f):
    f = click.option("--coords", default="Q", show_default=True,
                     help="Coordinate codec for CSV: Q, R or a group descriptor")(f)
    f = click.option("--symbols", default="N", show_default=True,
                     help="Symbol codec for CSV: N, R or a group descriptor")(f)
    return f


@cli.group()
def verify():
    """Check a saved window or region (CSV or JSON)."""
    pass


@verify.command("latin")
@click.argument("region_path", type=click.Path(exists=True, dir_okay=False))
@_region_options
def verify_latin_cmd(region_path, symbols, coords):
    from latininf.services.square_service import verify_latin

    with _guard():
        report = verify_latin(_load_region(region_path, symbols, coords))
    _finish(report)


@verify.command("vatican")
@click.argument("region_path", type=click.Path(exists=True, dir_okay=False))
@_region_options
def verify_vatican_cmd(region_path, symbols, coords):
    from latininf.services.square_service import verify_vatican_safety

    with _guard():
        report = verify_vatican_safety(_load_region(region_path, symbols, coords))
    _finish(report)


@verify.command("semivatican")
@click.argument("region_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", type=float, default=None, help="Tolerance matching (real-line windows)")
@_region_options
def verify_semivatican_cmd(region_path, tol, symbols, coords):
    from latininf.services.realline_service import verify_semivatican_tolerance
    from latininf.services.square_service import REALS, verify_semivatican_safety

    with _guard():
        region = _load_region(region_path, symbols, coords)
        if tol is not None or region.coords == REALS:
            report = verify_semivatican_tolerance(region, tol or DEFAULT_TOL)
        else:
            report = verify_semivatican_safety(region)
    _finish(report)


@verify.command("dcomplete")
@click.argument("region_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-distance", required=True, help="D: check every distance d <= D")
@_region_options
def verify_dcomplete_cmd(region_path, max_distance, symbols, coords):
    from latininf.services.square_service import verify_d_complete

    with _guard():
        report = verify_d_complete(_load_region(region_path, symbols, coords), max_distance)
    _finish(report)


@verify.command("orthogonal")
@click.argument("first_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("second_path", type=click.Path(exists=True, dir_okay=False))
@_region_options
def verify_orthogonal_cmd(first_path, second_path, symbols, coords):
    from latininf.services.square_service import verify_orthogonal

    with _guard():
        report = verify_orthogonal(_load_region(first_path, symbols, coords),
                                   _load_region(second_path, symbols, coords))
    _finish(report)


@verify.command("knutvic")
@click.argument("region_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--group", "group_spec", required=True, help="Group indexing rows and columns")
@click.option("--full", is_flag=True, help="Require the whole |G| x |G| square")
@_region_options
def verify_knutvic_cmd(region_path, group_spec, full, symbols, coords):
    from latininf.groups import parse_group
    from latininf.services.square_service import verify_knutvic

    with _guard():
        report = verify_knutvic(_load_region(region_path, symbols, coords),
                                parse_group(group_spec), full=full)
    _finish(report)


@verify.command("quadrangle")
@click.argument("region_path", type=click.Path(exists=True, dir_okay=False))
@_region_options
def verify_quadrangle_cmd(region_path, symbols, coords):
    """Passes when no quadrangle violation exists (group-based squares pass)."""
    from latininf.models import VerificationReport
    from latininf.services.square_service import find_quadrangle_violation

    with _guard():
        region = _load_region(region_path, symbols, coords)
        witness = find_quadrangle_violation(region)
        report = VerificationReport("quadrangle", witness is None,
                                    [witness] if witness else [], {"cells": len(region)})
    _finish(report)


@verify.command("immune")
@click.argument("region_path", type=click.Path(exists=True, dir_okay=False))
@_region_options
@click.pass_context
def verify_immune_cmd(ctx, region_path, symbols, coords):
    """Brute force over every column permutation (at most 7 columns)."""
    from latininf.services.construct_service import verify_immune

    with _guard():
        report = verify_immune(_load_region(region_path, symbols, coords), jobs=ctx.obj["jobs"])
    _finish(report)


@verify.command("state")
@click.argument("artifact", type=click.Path(exists=True, dir_okay=False))
def verify_state_cmd(artifact):
    """Re-run the invariant checker of a saved builder state."""
    from latininf.store import load_artifact

    with _guard():
        state = load_artifact(artifact)[0]
        if not hasattr(state, "check"):
            raise ValueError(f"{artifact} holds no builder state")
        report = state.check()
    _finish(report)


# ─── immunize ────────────────────────────────────────────────────────

@cli.command()
@click.argument("region_path", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--place", "placements", nargs=3, type=int, multiple=True, metavar="ROW COL SYMBOL",
              help="Place a symbol first (repeatable)")
@click.option("--out", default=None, help="Save an immune-region artifact")
def immunize(region_path, placements, out):
    """Give every untreated triple of nonempty columns its own 3x3 block.

    Without REGION_PATH, starts from the 3x3 cyclic seed. Rows count from the
    bottom; the CSV on stdout lists every cell.
    """
    from latininf.services.construct_service import ImmuneRegion, seed_rowcomplete
    from latininf.services.square_service import render

    with _guard():
        if region_path is None:
            state = seed_rowcomplete()
        elif _artifact_kind(region_path) == "immune-region":
            from latininf.store import load_artifact
            state = load_artifact(region_path, "immune-region")[0]
        else:
            region = _load_region(region_path, "N", "Q")
            if any(not isinstance(p, int) for cell in region.cells for p in cell):
                raise ValueError("immunize needs integer rows and columns")
            state = ImmuneRegion(region)
        rows_before = len(state.region.rows())
        for row, col, symbol in placements:
            state.region.place(row, col, symbol)
        state.immunize()
        if out:
            from latininf.store import save_artifact
            save_artifact(out, "immune-region", state)
            console.print(f"[green][OK][/green] immune region saved to {out}")
        console.print(
            f"[green][OK][/green] {len(state.region.rows()) - rows_before} new rows, "
            f"{len(state.ledger)} treated triples"
        )
        click.echo(render(state.region, "csv"), nl=False)


# ─── oracle commands ─────────────────────────────────────────────────

@cli.group()
def oracle():
    """Independent finite oracles."""
    pass


@oracle.command("williams")
@click.argument("n", type=int)
@click.option("--out", default=None, help="Write the square as CSV and print the report instead")
def oracle_williams(n, out):
    """Row-complete Cayley square of even order n (CSV on stdout).

    A square that fails its Latin or row-completeness check is never printed;
    the JSON report with its witnesses goes to stdout and the exit code is 1.
    """
    from latininf.models import VerificationReport
    from latininf.services.square_service import (
        render, verify_d_complete, verify_latin, williams_complete_square,
    )

    with _guard():
        region = williams_complete_square(n)
        latin = verify_latin(region)
        complete = verify_d_complete(region, 1)
    report = VerificationReport(
        "williams", latin.passed and complete.passed,
        latin.witnesses + complete.witnesses,
        {"cells": len(region), "latin": latin.passed, "row_complete": complete.passed},
    )
    console.print(f"latin: {format_verdict(latin.passed)}  row complete: {format_verdict(complete.passed)}")
    if out:
        Path(out).write_text(render(region, "csv"), encoding="utf-8")
    if out or not report.passed:
        _finish(report)
        return
    click.echo(render(region, "csv"), nl=False)


@oracle.command("bruteforce-scm")
@click.option("--group", "group_spec", default=None, help="Finite group descriptor")
@click.option("--factors", default=None, help="Cyclic orders, e.g. 2,4")
@click.option("--cap", type=click.IntRange(min=1), default=BRUTE_FORCE_CAP, show_default=True)
@click.pass_context
def oracle_bruteforce_scm(ctx, group_spec, factors, cap):
    """Exhaustive SCM search on a small finite group."""
    from latininf.groups import finite_abelian, parse_group
    from latininf.services.ortho_service import brute_force_scm_search

    with _guard():
        if (group_spec is None) == (factors is None):
            raise click.UsageError("give exactly one of --group or --factors")
        if group_spec is not None:
            group = parse_group(group_spec)
        else:
            group = finite_abelian([int(n) for n in factors.split(",") if n.strip()])
        found = brute_force_scm_search(group, cap=cap, jobs=ctx.obj["jobs"])
    doc = {"group": group.descriptor, "found": found is not None}
    if found is not None:
        doc["pairs"] = found.to_dict()["pairs"]
    _emit(doc)
    console.print(f"SCM of {group.descriptor}: {format_verdict(found is not None)}")


@oracle.command("nim-table")
@click.argument("bits", type=click.IntRange(min=0, max=4))
def oracle_nim_table(bits):
    """Nim multiplication table on {0..2^bits-1}."""
    from latininf.services.ortho_service import nim_table

    rows = nim_table(bits)
    table = Table(title=f"nim products below {1 << bits}")
    table.add_column("x", style="cyan")
    for y in range(len(rows)):
        table.add_column(str(y), justify="right")
    for x, line in enumerate(rows):
        table.add_row(str(x), *(str(v) for v in line))
    console.print(table)
    _emit({"bits": bits, "table": rows})


if __name__ == "__main__":
    cli()
