import json
import os
import random
import sys

import click

from surfcalc import config, endspace, exhaustion, mcgword, pants, shiftbasis, surface
from surfcalc.errors import SurfcalcError, Violation
from surfcalc.logger import get_logger, setup_applevel_logger
from surfcalc.paths import SURFACES_PATH

log = get_logger("CLI")

EXIT_VIOLATIONS = 2
EXIT_ERROR = 1
EXIT_USAGE = 64


def emit(report: dict):
    """Writes a report as compact json with sorted keys."""
    click.echo(json.dumps(report, sort_keys=True, separators=(",", ":")))


def fail_with_violations(ctx: click.Context, violations, report: dict = None):
    report = dict(report or {})
    report["violations"] = [v.to_dict() for v in violations]
    emit(report)
    ctx.exit(EXIT_VIOLATIONS)


def load_spec(path: str) -> surface.SurfaceSpec:
    """
    Loads a surface spec from a path, or by file name from the packaged
    example surfaces.
    """
    if not os.path.exists(path):
        packaged = os.path.join(SURFACES_PATH, os.path.basename(path))
        if not path.endswith(".json"):
            packaged += ".json"
        if not os.path.exists(packaged):
            raise click.BadParameter(f"no surface file {path!r}")
        path = packaged
    return surface.load_surface_spec(path)


def load_valid_spec(ctx: click.Context, path: str) -> surface.SurfaceSpec:
    s = load_spec(path)
    violations = surface.validate_surface(s)
    if violations:
        fail_with_violations(ctx, violations, {"surface": path})
    return s


def parse_finite(text: str) -> surface.FiniteSurface:
    """Reads "g,n,b,or" or "g,n,b,nonor" into a FiniteSurface."""
    parts = text.split(",")
    if len(parts) != 4 or parts[3] not in ("or", "nonor"):
        raise click.BadParameter(f"expected g,n,b,or|nonor, got {text!r}")
    try:
        g, n, b = (int(p) for p in parts[:3])
        return surface.FiniteSurface(parts[3] == "or", g, n, b)
    except ValueError as exc:
        raise click.BadParameter(f"bad finite surface {text!r}: {exc}") from exc


def graph_report(g) -> dict:
    return {
        "nodes": [{"id": n, **d} for n, d in sorted(g.nodes(data=True))],
        "edges": [
            {"source": u, "target": v, **d} for u, v, d in sorted(g.edges(data=True))
        ],
    }


# cli commands ################################################################


@click.group()
@click.option("--depth", type=int, default=None, help="truncation depth")
@click.option("--seed", type=int, default=0, help="seed for random words")
@click.option(
    "--format", "fmt", type=click.Choice(["json", "dot"]), default="json"
)
@click.option("--debug", is_flag=True, help="debug logging on stderr")
@click.pass_context
def cli(ctx, depth, seed, fmt, debug):
    """cli for surfcalc"""
    setup_applevel_logger(is_debug=debug)
    ctx.obj = {"depth": depth, "seed": seed, "format": fmt}


def depth_of(ctx: click.Context) -> int:
    return config.resolve_depth(ctx.obj["depth"])


# end spaces and surfaces #####################################################


@cli.command()
@click.argument("spec_a")
@click.argument("spec_b")
@click.pass_context
def classify(ctx, spec_a, spec_b):
    """
    Decides whether two surface specs describe homeomorphic surfaces.
    """
    a = load_valid_spec(ctx, spec_a)
    b = load_valid_spec(ctx, spec_b)
    emit({"verdict": surface.homeomorphic(a, b).value})


@cli.command("ends-normalize")
@click.argument("expr")
@click.pass_context
def ends_normalize(ctx, expr):
    """
    Canonical form of an end expression together with its end counts.
    """
    e = endspace.parse_end_expr(expr)
    violations = endspace.validate_closedness(e)
    if violations:
        fail_with_violations(ctx, violations, {"expr": expr})
    form = endspace.normalize(e, config.get_defaults().max_seq_nesting)
    emit(
        {
            "expr": endspace.format_end_expr(e),
            "canonical": form.to_dict(),
            "ends": endspace.format_count(endspace.count_ends(e)),
            "genus_ends": endspace.format_count(endspace.count_genus_ends(e)),
            "nonorientable_ends": endspace.format_count(
                endspace.count_nonorientable_ends(e)
            ),
        }
    )


# exhaustions #################################################################


@cli.command()
@click.argument("spec")
@click.pass_context
def exhaust(ctx, spec):
    """
    Builds and validates the first levels of a principal exhaustion.
    """
    s = load_valid_spec(ctx, spec)
    pe = exhaustion.build_exhaustion(s, depth_of(ctx))
    levels = []
    for level in pe.levels:
        levels.append(
            {
                "index": level.index,
                "boundary": list(level.boundary),
                "pieces": [
                    {
                        "id": p.piece_id,
                        "surface": p.surface.to_dict(),
                        "inherited": list(p.inherited_boundary),
                        "new": list(p.new_boundary),
                    }
                    for p in level.pieces
                ],
            }
        )
    report = {"levels": levels}
    violations = exhaustion.validate_exhaustion(pe)
    if violations:
        fail_with_violations(ctx, violations, report)
    report["violations"] = []
    emit(report)


@cli.command()
@click.argument("spec")
@click.option("--probe", default=None, help="curve id to count intersections for")
@click.pass_context
def alexander(ctx, spec, probe):
    """
    Builds the Alexander system on a principal exhaustion and checks its
    local finiteness at a probe curve.
    """
    s = load_valid_spec(ctx, spec)
    pe = exhaustion.build_exhaustion(s, depth_of(ctx))
    system = exhaustion.alexander_system(pe)
    pieces = {}
    for piece in pe.pieces():
        pieces[piece.piece_id] = {
            "local": len(system.Gamma_j[piece.piece_id]),
            "expected": exhaustion.alexander_curve_count(piece.surface),
        }
    report = {
        "B": list(system.B),
        "curves": len(system.gamma()),
        "pieces": pieces,
    }
    if probe is not None:
        report["probe"] = {
            "curve": probe,
            "intersecting": exhaustion.check_local_finiteness(system, probe),
        }
    emit(report)


# pants decompositions ########################################################


@cli.command("pants-check")
@click.option("--finite", "finite", default=None, help="surface as g,n,b,or|nonor")
@click.option("--max-chi", type=int, default=6, help="largest -chi in the survey")
@click.option("--max-count", type=int, default=None, help="decompositions per surface")
@click.pass_context
def pants_check(ctx, finite, max_chi, max_count):
    """
    Enumerates pants decompositions and compares cut vertices of the
    adjacency graph with the non-outer separating curves. Without --finite
    every surface without boundary up to --max-chi is surveyed.
    """
    if finite:
        surfaces = [parse_finite(finite)]
    else:
        surfaces = survey_surfaces(max_chi)
    max_pants = config.get_defaults().max_pants
    reports = []
    violations = []
    for f in surfaces:
        decompositions = pants.enumerate_pants_decompositions(f, max_count, max_pants)
        rows = []
        for i, decomposition in enumerate(decompositions):
            for v in pants.validate_pants(decomposition, f):
                violations.append(Violation(f"{f.label()}#{i}.{v.where}", v.message))
            report = pants.cut_vertex_check(decomposition)
            separating = [
                c for c in decomposition.curve_ids if pants.is_separating(c, decomposition)
            ]
            row = report.to_dict()
            row["separating"] = separating
            row["outer"] = [c for c in separating if pants.is_outer(c, decomposition)]
            row["adjacency_edges"] = pants.adjacency_graph(decomposition).number_of_edges()
            rows.append(row)
            if f.boundary == 0 and not report.coincide:
                message = "cut vertices differ from non-outer separating curves"
                violations.append(Violation(f"{f.label()}#{i}", message))
        reports.append({"surface": f.label(), "decompositions": rows})
    if violations:
        fail_with_violations(ctx, violations, {"surfaces": reports})
    emit({"surfaces": reports, "violations": []})


def survey_surfaces(max_chi: int):
    """Every surface without boundary with 1 <= -chi <= max_chi."""
    surfaces = []
    for chi in range(1, max_chi + 1):
        for g in range(0, (chi + 2) // 2 + 1):
            n = chi + 2 - 2 * g
            if n >= 0:
                surfaces.append(surface.FiniteSurface(True, g, n))
        for g in range(1, chi + 2 + 1):
            n = chi + 2 - g
            if n >= 0:
                surfaces.append(surface.FiniteSurface(False, g, n))
    return surfaces


# handle-shifts ###############################################################


def build_basis(ctx, spec):
    s = load_valid_spec(ctx, spec)
    s_hat = surface.forget_planar(s)
    tree = shiftbasis.end_tree(s_hat, depth_of(ctx))
    return s_hat, tree, shiftbasis.good_basis(s_hat, tree=tree)


@cli.command()
@click.argument("spec")
@click.option(
    "--between",
    nargs=2,
    default=None,
    metavar="A B",
    help="write the shift from end A to end B in basis shifts",
)
@click.pass_context
def basis(ctx, spec, between):
    """
    Good basis of separating curves, the handle-shift on each curve and the
    pseudo-orientable companions on curves between non-orientable ends.
    """
    s_hat, tree, curves = build_basis(ctx, spec)
    shifts = [shiftbasis.classify_shift(c, s_hat) for c in curves]
    report = {
        "ends": [e.name for e in tree.leaves()],
        "curves": [c.to_dict() for c in curves],
        "shifts": [h.to_dict() for h in shifts],
        "pseudo_orientable": [
            shiftbasis.pseudo_orientable_shift(c).to_dict()
            for c in curves
            if c.outside_end.nonorientable and c.inside_end.nonorientable
        ],
    }
    if between:
        try:
            steps = shiftbasis.shift_between(*between, curves)
        except KeyError as exc:
            raise click.BadParameter(str(exc)) from exc
        report["between"] = [{"index": i, "sign": sign} for i, sign in steps]
    emit(report)


@cli.command("shift-graph")
@click.argument("spec")
@click.option(
    "--which", type=click.Choice(["eg", "teg", "nteg"]), default="teg"
)
@click.pass_context
def shift_graph(ctx, spec, which):
    """
    The ends graph, the tree of basis handle-shifts or its non-orientable
    part, as json or dot.
    """
    s_hat, _, curves = build_basis(ctx, spec)
    if which == "eg":
        g = shiftbasis.ends_graph(s_hat, depth_of(ctx))
    else:
        g = shiftbasis.teg(curves)
        if which == "nteg":
            g = shiftbasis.nteg(g)
    if ctx.obj["format"] == "dot":
        click.echo(shiftbasis.to_dot(g))
    else:
        emit(graph_report(g))


@cli.command()
@click.argument("spec")
@click.pass_context
def rank(ctx, spec):
    """
    Rank r of the separating homology, cross-checked against the cellular
    window computation.
    """
    _, _, curves = build_basis(ctx, spec)
    r = shiftbasis.rank_r(curves)
    oracle = shiftbasis.homology_rank_oracle(
        curves, config.get_defaults().homology_window_genus
    )
    report = {"r": r.to_json(), "oracle": oracle.to_dict()}
    if r.finite:
        report["agrees"] = r.value == oracle.rank
    emit(report)


# words #######################################################################


@cli.command("word-eval")
@click.argument("word")
@click.option("--rank", "rank_", type=int, default=None, help="finite rank r")
@click.option("--relators", type=int, default=0, help="relators to insert")
@click.option("--substitute", type=int, default=None, help="shift index to substitute")
@click.option("--spec", default=None, help="surface spec for --substitute")
@click.option("--window", default="", help="comma separated basis curve ids")
@click.option("--crossed", is_flag=True, help="the window crosses the shift support")
@click.pass_context
def word_eval(ctx, word, rank_, relators, substitute, spec, window, crossed):
    """
    Evaluates phi on a word and rewrites it by conjugation, relator
    insertion and compact substitution.
    """
    w = mcgword.parse_word(word)
    vector = mcgword.phi(w, rank_)
    rewritten = mcgword.conjugate_rewrite(w)
    report = {
        "word": mcgword.format_word(w),
        "phi": vector.to_dict(),
        "psi": {str(i): mcgword.psi(w, i, rank_) for i, _ in vector.coords},
        "rewritten": mcgword.format_word(rewritten),
        "kernel": mcgword.kernel_coordinate_test(w),
    }
    if rank_ is not None:
        report["phi_bar"] = mcgword.phi_bar_coordinates(w, rank_).tolist()
    if relators:
        rng = random.Random(ctx.obj["seed"])
        indices = [letter.index for letter in w if isinstance(letter, mcgword.Shift)]
        r = rank_ or max(indices, default=0) + 1
        extended = w
        for _ in range(relators):
            extended = mcgword.insert_relator(extended, rng, r)
        report["with_relators"] = mcgword.format_word(extended)
        report["phi_unchanged"] = mcgword.phi(extended, rank_) == vector
    if substitute is not None:
        if spec is None:
            raise click.BadParameter("--substitute needs --spec")
        _, _, curves = build_basis(ctx, spec)
        names = [c for c in window.split(",") if c]
        crossed_set = [substitute] if crossed else []
        try:
            win = mcgword.Window.from_basis(names, curves, crossed_set)
        except KeyError as exc:
            raise click.BadParameter(str(exc)) from exc
        substituted = mcgword.substitute_compact(w, substitute, win)
        report["substituted"] = mcgword.format_word(substituted)
        report["window_record_kept"] = mcgword.restrict_to_window(
            substituted, win
        ) == mcgword.restrict_to_window(w, win)
    emit(report)


@cli.command("relation-check")
@click.option("--window", type=int, default=None, help="strip half-width")
@click.option("--broken", is_flag=True, help="also run the variant without h3")
@click.option("--round-trip", is_flag=True, help="also split the handle row back")
@click.pass_context
def relation_check(ctx, window, broken, round_trip):
    """
    Checks the handle-shift relation between three crosscap rows and a
    handle row plus a crosscap row on a finite strip.
    """
    if window is None:
        window = config.get_defaults().relation_window
    report = {"relation_eq1": shiftbasis.strip_relation_check(window)}
    if broken:
        report["broken_relation"] = shiftbasis.broken_strip_relation_check(window)
    if round_trip:
        report["round_trip"] = shiftbasis.strip_round_trip(window)
    emit(report)


@cli.command()
@click.argument("spec", required=False)
@click.option("--finite", default=None, help="surface as g,n,b,or|nonor")
@click.pass_context
def cohomology(ctx, spec, finite):
    """
    First integral cohomology of the pure mapping class group, or with
    --finite the genus gate and applicability checks of a finite surface.
    """
    if finite:
        f = parse_finite(finite)
        rigid = None if f.boundary else surface.excluded_for_rigidity(f)
        emit(
            {
                "surface": f.label(),
                "torsion_abelianization": mcgword.torsion_abelianization_gate(f),
                "alexander_applicable": surface.alexander_applicable(f),
                "excluded_for_rigidity": rigid,
            }
        )
        return
    if spec is None:
        raise click.UsageError("cohomology needs SPEC or --finite")
    s = load_valid_spec(ctx, spec)
    emit(mcgword.cohomology(s, depth_of(ctx)).to_dict())


def main(argv=None) -> int:
    """Runs the cli and maps failures to exit codes."""
    try:
        code = cli.main(args=argv, prog_name="surfcalc", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_ERROR
    except (SurfcalcError, config.ConfigError) as exc:
        log.error(str(exc))
        click.echo(f"error: {exc}", err=True)
        return EXIT_ERROR
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
