"""Command-line entry point.

Subcommands::

    polygon build|check|dual|reduce
    criterion
    coxeter criterion
    free solve|cylinders|witness
    verify arccos|sqrt|scalar
    walk simulate|drift|entropy|histogram|report

JSON documents are written with Python's shortest round-trip float repr,
so re-reading a document reproduces every number bit for bit.
"""

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, is_dataclass

import numpy as np

from hypwalk import coxeter as cx
from hypwalk import freewalk as fwk
from hypwalk import fuchswalk as fw
from hypwalk import inequality as ineq
from hypwalk import polygon as pg
from hypwalk.exceptions import HypwalkError, NoWitnessGuarantee


@dataclass
class CommandResult:
    exit_code: int
    artifacts: list = field(default_factory=list)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raise instead of exiting so :func:`run` can report exit code 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


# -- io helpers --------------------------------------------------------------

def _jsonable(obj):
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _emit(doc, out, artifacts):
    text = json.dumps(_jsonable(doc), indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
        artifacts.append(out)
    else:
        print(text)


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def _floats(text, n=None):
    """Parse "uniform" or a comma list (or JSON list) into a float array."""
    if text == "uniform":
        if n is None:
            raise UsageError("'uniform' needs --m")
        return None
    text = text.strip()
    vals = json.loads(text) if text.startswith("[") else [float(v) for v in text.split(",")]
    return np.asarray(vals, dtype=float)


def _load_polygon(path):
    return pg.SymmetricPolygon.from_dict(_load(path))


def _measure(args, kind, n_symbols):
    """Step distribution from --measure (file) or uniform on ``n_symbols``."""
    if getattr(args, "measure", None):
        mu = fwk.StepDistribution.from_dict(_load(args.measure))
    else:
        mu = fwk.StepDistribution.uniform(kind, n_symbols)
    if kind and mu.kind != kind:
        raise UsageError(f"measure must be of kind {kind!r}")
    return mu


def _workers(args):
    return args.threads or fwk.default_workers()


# -- polygon -----------------------------------------------------------------

def _polygon_build(args, artifacts):
    if args.k_values:
        ks = [int(k) for k in args.k_values.split(",")]
        w = None if args.weights == "uniform" else _floats(args.weights)
        _emit(cx.CoxeterPolygon.build(ks, w).to_dict(), args.output, artifacts)
        return
    if args.random:
        if args.seed is None:
            raise UsageError("--random needs --seed")
        if args.m is None or args.k is None:
            raise UsageError("--random needs --m and --k")
        poly = pg.random_polygon(np.random.default_rng(args.seed), args.m, args.k)
        _emit(poly.to_dict(), args.output, artifacts)
        return
    if args.m is None:
        raise UsageError("polygon build needs --m")
    m = args.m
    alpha = _floats(args.alpha, m)
    weights = _floats(args.weights, m)
    alpha = np.full(m, math.pi / m) if alpha is None else alpha
    weights = np.ones(m) if weights is None else weights
    poly = pg.build(pg.PolygonSpec(m, alpha, weights, args.k))
    _emit(poly.to_dict(), args.output, artifacts)


def _polygon_check(args, artifacts):
    poly = _load_polygon(args.polygon)
    try:
        k = pg.check_cycle(poly)
    except HypwalkError:
        k = None
    doc = {
        "cycle_k": k,
        "angle_sum": float(poly.gamma.sum()),
        "symmetry_defect": poly.symmetry_defect(),
        "max_vertex_residual": float(np.abs(poly.vertex_residuals()).max()),
        "neutralizing": pg.neutralizing_pairs(poly),
        "sigma": pg.sigma(poly),
    }
    _emit(doc, args.output, artifacts)


def _polygon_dual(args, artifacts):
    d = pg.dual(_load_polygon(args.polygon))
    doc = d.to_dict()
    doc["sigma"] = pg.dual_sigma(d)
    _emit(doc, args.output, artifacts)


def _polygon_reduce(args, artifacts):
    _emit(pg.reduce_to_acute(_load_polygon(args.polygon)).to_dict(), args.output, artifacts)


# -- criteria ----------------------------------------------------------------

def _criterion(args, artifacts):
    poly = _load_polygon(args.polygon)
    doc = ineq.polygon_criterion(poly).to_dict()
    if args.witness:
        mu = _measure(args, "free", 2 * poly.m)
        lengths = pg.pairing_lengths(poly)[: poly.m]
        try:
            doc["witness"] = fwk.criterion_witness(lengths, mu).to_dict()
        except NoWitnessGuarantee as exc:
            doc["witness"] = exc.report.to_dict()
    _emit(doc, args.output, artifacts)


def _coxeter_criterion(args, artifacts):
    cp = cx.CoxeterPolygon.from_dict(_load(args.polygon))
    mu = _measure(args, "involutive", 2 * cp.m)
    _emit(cx.coxeter_criterion(cp, mu).to_dict(), args.output, artifacts)


# -- free groups -------------------------------------------------------------

def _free_measure(args):
    if args.measure:
        return fwk.StepDistribution.from_dict(_load(args.measure))
    if args.uniform:
        kind, _, n = args.uniform.partition(":")
        if kind not in fwk.KINDS or not n.isdigit():
            raise UsageError("--uniform expects KIND:N, e.g. free:8")
        return fwk.StepDistribution.uniform(kind, int(n))
    raise UsageError("give --measure or --uniform")


def _free_solve(args, artifacts):
    _emit(fwk.solve_first_passage(_free_measure(args)).to_dict(), args.output, artifacts)


def _free_cylinders(args, artifacts):
    fp = fwk.solve_first_passage(_free_measure(args))
    _emit(fwk.cylinder_measures(fp).to_dict(), args.output, artifacts)


def _free_witness(args, artifacts):
    mu = _free_measure(args)
    lengths = _floats(args.lengths)
    try:
        doc = fwk.criterion_witness(lengths, mu).to_dict()
    except NoWitnessGuarantee as exc:
        doc = exc.report.to_dict()
        doc["warning"] = str(exc)
    _emit(doc, args.output, artifacts)


# -- verification ------------------------------------------------------------

def _verify(args, artifacts):
    if args.which == "scalar":
        rep = ineq.verify_scalar_bounds(args.budget)
    else:
        if args.seed is None:
            raise UsageError(f"verify {args.which} needs --seed")
        fn = ineq.verify_arccos_bound if args.which == "arccos" else ineq.verify_sqrt_bound
        rep = fn(args.m, args.budget, args.seed, _workers(args))
    doc = rep.to_dict()
    doc["ok"] = rep.ok
    _emit(doc, args.output, artifacts)


# -- walks -------------------------------------------------------------------

def _walk_setup(args):
    doc = _load(args.polygon)
    if args.reflections:
        cp = cx.CoxeterPolygon.from_dict(doc)
        mu = _measure(args, "involutive", 2 * cp.m)
        return cx.reflections(cp).reflections, mu, cp.polygon
    poly = pg.SymmetricPolygon.from_dict(doc)
    mu = _measure(args, "free", 2 * poly.m)
    return pg.side_pairings(poly), mu, poly


def _sample(args):
    if args.seed is None:
        raise UsageError("walk commands need --seed")
    gens, mu, _ = _walk_setup(args)
    return fw.simulate(gens, mu, args.n, args.paths, args.seed, _workers(args))


def _walk_simulate(args, artifacts):
    _emit(_sample(args).to_dict(), args.output, artifacts)


def _walk_drift(args, artifacts):
    _emit(fw.estimate_drift(_sample(args)).to_dict(), args.output, artifacts)


def _walk_entropy(args, artifacts):
    gens, mu, _ = _walk_setup(args)
    bounds = fw.entropy_upper_bounds(mu, gens, args.n_max, _workers(args))
    _emit({"entropy_bounds": bounds}, args.output, artifacts)


def _walk_histogram(args, artifacts):
    hist = fw.boundary_histogram(_sample(args), args.bins)
    if args.output:
        hist.write_csv(args.output)
        artifacts.append(args.output)
    else:
        print("bin_start_rad,bin_end_rad,count,frequency")
        for r in hist.rows():
            print(f"{r[0]!r},{r[1]!r},{r[2]},{r[3]!r}")
    if hist.warning:
        print(json.dumps({"warning": hist.warning}), file=sys.stderr)
    if args.plot_data:
        _emit(hist.plot_data(), args.plot_data, artifacts)


def _walk_report(args, artifacts):
    if args.seed is None:
        raise UsageError("walk commands need --seed")
    poly = _load_polygon(args.polygon)
    mu = _measure(args, "free", 2 * poly.m)
    rep = fw.dimension_report(poly, mu, args.n, args.paths, args.seed, args.n_max, _workers(args))
    _emit(rep.to_dict(), args.output, artifacts)


# -- parser ------------------------------------------------------------------

def _common(p, seed=False):
    p.add_argument("-o", "--output", help="output file (default: standard output)")
    p.add_argument("--threads", type=int, help="worker threads (default: HYPWALK_THREADS or all cores)")
    if seed:
        p.add_argument("--seed", type=int, help="master seed (required for randomized commands)")


def build_parser():
    parser = _Parser(prog="hypwalk", description="Symmetric hyperbolic polygons and random walks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    poly = sub.add_parser("polygon", help="build and transform polygons")
    psub = poly.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = psub.add_parser("build")
    b.add_argument("--m", type=int)
    b.add_argument("--alpha", default="uniform", help="'uniform' or m central angles")
    b.add_argument("--weights", default="uniform", help="'uniform' or m apothem weights")
    b.add_argument("--k", type=int, help="cycle integer to solve for")
    b.add_argument("--k-values", help="comma list k_1..k_m for a Coxeter polygon")
    b.add_argument("--random", action="store_true", help="random polygon with cycle integer --k")
    _common(b, seed=True)
    b.set_defaults(func=_polygon_build)
    for name, fn in (("check", _polygon_check), ("dual", _polygon_dual), ("reduce", _polygon_reduce)):
        q = psub.add_parser(name)
        q.add_argument("polygon")
        _common(q)
        q.set_defaults(func=fn)

    c = sub.add_parser("criterion", help="singularity criterion for a polygon")
    c.add_argument("polygon")
    c.add_argument("--witness", action="store_true", help="also search for a witness generator")
    c.add_argument("--measure", help="free-kind measure document for --witness")
    _common(c)
    c.set_defaults(func=_criterion)

    cox = sub.add_parser("coxeter", help="reflection groups")
    csub = cox.add_subparsers(dest="action", required=True, parser_class=_Parser)
    cc = csub.add_parser("criterion")
    cc.add_argument("polygon")
    cc.add_argument("--measure", help="involutive measure document (default uniform)")
    _common(cc)
    cc.set_defaults(func=_coxeter_criterion)

    free = sub.add_parser("free", help="walks on free groups and free products")
    fsub = free.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, fn in (("solve", _free_solve), ("cylinders", _free_cylinders), ("witness", _free_witness)):
        q = fsub.add_parser(name)
        q.add_argument("--measure", help="measure document")
        q.add_argument("--uniform", help="uniform measure KIND:N, e.g. free:8")
        if name == "witness":
            q.add_argument("--lengths", required=True, help="comma list of translation lengths")
        _common(q)
        q.set_defaults(func=fn)

    ver = sub.add_parser("verify", help="numerical checks of the inequalities")
    vsub = ver.add_subparsers(dest="which", required=True, parser_class=_Parser)
    for name in ("arccos", "sqrt", "scalar"):
        q = vsub.add_parser(name)
        if name != "scalar":
            q.add_argument("--m", type=int, required=True)
        q.add_argument("--budget", type=int, default=10_000)
        _common(q, seed=name != "scalar")
        q.set_defaults(func=_verify)

    walk = sub.add_parser("walk", help="random walk simulation")
    wsub = walk.add_subparsers(dest="action", required=True, parser_class=_Parser)
    specs = {
        "simulate": _walk_simulate,
        "drift": _walk_drift,
        "entropy": _walk_entropy,
        "histogram": _walk_histogram,
        "report": _walk_report,
    }
    for name, fn in specs.items():
        q = wsub.add_parser(name)
        q.add_argument("polygon")
        q.add_argument("--measure", help="measure document (default uniform)")
        if name != "report":
            q.add_argument("--reflections", action="store_true",
                           help="walk on the side reflections of a Coxeter polygon")
        if name in ("simulate", "drift", "histogram", "report"):
            q.add_argument("--n", type=int, default=100, help="steps per path")
            q.add_argument("--paths", type=int, default=1000)
        if name in ("entropy", "report"):
            q.add_argument("--n-max", type=int, default=2)
        if name == "histogram":
            q.add_argument("--bins", type=int, default=32)
            q.add_argument("--plot-data", help="write (x, y) series as JSON")
        _common(q, seed=name != "entropy")
        q.set_defaults(func=fn)
    return parser


def run(argv):
    """Run one command; returns the exit code and the files written."""
    artifacts = []
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args, artifacts)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return CommandResult(2, artifacts)
    except SystemExit as exc:  # --help
        return CommandResult(int(exc.code or 0), artifacts)
    except HypwalkError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return CommandResult(1, artifacts)
    except (ValueError, OSError, KeyError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return CommandResult(1, artifacts)
    return CommandResult(0, artifacts)


def main():
    sys.exit(run(sys.argv[1:]).exit_code)


if __name__ == "__main__":
    main()
