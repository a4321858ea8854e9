"""medianqs: certified median quasi-state computations on S^2."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from field.pl import pl_sup_error_bound, sample
from field.reeb import build_reeb, collapse, critical_vertices, tree_to_json
from harness.config import RunConfig, generic_rotation, load_input, parse_int_list, resolve_workers
from harness.convergence import rows_to_csv, run_sweep
from quasistate.median import MedianSolver, k_for_N, select_parameters
from quasistate.wasserstein import theorem2_trials
from sphere.base import random_unit_points, to_unit_points
from sphere.constants import MIN_ANGLE
from sphere.errors import (
    DomainError,
    InvariantViolation,
    ParameterError,
    ParseError,
    QuasiStateError,
    ResourceLimitError,
)
from sphere.icosa import (
    build_triangulation,
    diameter_bound,
    max_curvilinear_diameter,
    min_plane_distance,
    min_planar_angle,
)
from sphere.partition import (
    build_partition,
    locate_by_scan,
    region_area,
    region_diameter_audit,
    region_inradius_audit,
)
from sphere.partition import diameter_bound as partition_diameter_bound
from sphere.partition import inradius_bound
from sphere.registry import list_functions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PARAMETERS = 3
EXIT_INVARIANT = 4
EXIT_RESOURCES = 5
EXIT_IO = 6


def exit_code(err: BaseException) -> int:
    if isinstance(err, ParseError):
        return EXIT_PARSE
    if isinstance(err, (ParameterError, DomainError)):
        return EXIT_PARAMETERS
    if isinstance(err, ResourceLimitError):
        return EXIT_RESOURCES
    if isinstance(err, OSError):
        return EXIT_IO
    return EXIT_INVARIANT


def _k_arg(text: str) -> Optional[int]:
    if text == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an odd integer or 'auto', got {text!r}")


def _add_function(p: argparse.ArgumentParser, required: bool = True) -> None:
    keys = ", ".join(f.key for f in list_functions())
    p.add_argument(
        "--function",
        dest="function_source",
        required=required,
        help=f"Builtin key ({keys}) or path to a polynomial / vertex-table JSON file.",
    )
    p.add_argument("--lip-bound", type=float, default=None, help="Lipschitz bound for vertex tables.")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="Seed for every random choice (unsigned 64-bit).")
    p.add_argument("--output", type=str, default=None, help="Write the artifact here instead of stdout.")
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="medianqs", description="Certified median quasi-state on the 2-sphere.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("compute", help="Compute zeta_Z(F) with its certified error bound.")
    _add_function(c)
    size = c.add_mutually_exclusive_group(required=True)
    size.add_argument("--epsilon", type=float, help="Target accuracy; (N, k) are chosen to meet it.")
    size.add_argument("--N", type=int, help="Subdivision level of the triangulation (>= 46).")
    c.add_argument("--k", type=_k_arg, default=None, help="Number of regions, odd >= 237, or 'auto'.")
    c.add_argument("--rotate", action="store_true", help="Compose f with a small generic rotation.")
    _add_common(c)

    s = sub.add_parser("convergence", help="Sweep N and emit a CSV of values and bounds.")
    _add_function(s)
    s.add_argument("--N-list", dest="N_list", type=parse_int_list, default=[46, 92, 184])
    s.add_argument("--workers", type=int, default=None, help="Worker processes (capped by MEDIANQS_THREADS).")
    s.add_argument("--reference", type=float, default=None, help="Known zeta(f); adds an abs_error column.")
    s.add_argument("--rotate", action="store_true")
    _add_common(s)

    a = sub.add_parser("audit-partition", help="Measure areas, diameters, inradii and locate agreement.")
    a.add_argument("--k", dest="k_list", type=parse_int_list, default=[243])
    a.add_argument("--samples", type=int, default=10_000, help="Random points checked against a linear scan.")
    _add_common(a)

    t = sub.add_parser("audit-triangulation", help="Measure diameters, angles and PL sup error of T_N.")
    t.add_argument("--N", type=int, required=True)
    t.add_argument("--samples", type=int, default=10_000, help="Random points for the sup-error audit.")
    _add_function(t, required=False)
    _add_common(t)

    r = sub.add_parser("reeb", help="Summarize or dump the collapsed Reeb tree of F.")
    _add_function(r)
    r.add_argument("--N", type=int, required=True)
    r.add_argument("--dump", action="store_true", help="Emit the collapsed tree as JSON.")
    r.add_argument("--rotate", action="store_true")
    _add_common(r)

    v = sub.add_parser("verify", help="Empirical checks on random instances.")
    v.add_argument("--theorem2", action="store_true", help="|zeta_mu - zeta_nu| <= Lip * W_inf trials.")
    v.add_argument("--N", type=int, default=8)
    v.add_argument("--trials", type=int, default=200)
    _add_common(v)
    return p


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        function_source=getattr(args, "function_source", None),
        epsilon=getattr(args, "epsilon", None),
        N=getattr(args, "N", None),
        k=getattr(args, "k", None) if args.subcommand == "compute" else None,
        seed=args.seed,
        output=args.output,
        lip_bound=getattr(args, "lip_bound", None),
        rotate=getattr(args, "rotate", False),
        N_list=getattr(args, "N_list", []),
        k_list=getattr(args, "k_list", []),
        workers=resolve_workers(getattr(args, "workers", None)),
        reference=getattr(args, "reference", None),
        dump=getattr(args, "dump", False),
        theorem2=getattr(args, "theorem2", False),
        trials=getattr(args, "trials", 200),
        samples=getattr(args, "samples", 10_000),
    )


def _input(config: RunConfig):
    rotation = generic_rotation(config.seed) if config.rotate else None
    return load_input(config.function_source, config.lip_bound, rotation)


def _compute(config: RunConfig) -> Dict[str, Any]:
    f = _input(config)
    if config.epsilon is not None:
        lip = f.lip_bound
        if lip is None:
            raise ParameterError(f"{f.kind} input needs --lip-bound")
        N, k = select_parameters(config.epsilon, float(lip))
    else:
        N = config.N
        k = config.k if config.k is not None else k_for_N(N)
    return MedianSolver(N, k).compute(f).to_dict()


def _audit_partition(config: RunConfig) -> Any:
    """One report object for a single k, a list of them for several."""
    rng = np.random.default_rng(config.seed)
    reports = []
    for k in config.k_list:
        partition = build_partition(k)
        areas = np.array([region_area(partition, rid) for rid in partition.regions()])
        target = 4.0 * np.pi / k
        points = to_unit_points(random_unit_points(rng, config.samples))
        mismatches = sum(partition.locate(p) != locate_by_scan(partition, p) for p in points)
        diameter = region_diameter_audit(partition)
        inradius = region_inradius_audit(partition)
        area_error = float(np.max(np.abs(areas - target)) / target)
        reports.append(
            {
                "k": k,
                "n": partition.n,
                "max_diameter": diameter,
                "bound_7_over_sqrt_k": partition_diameter_bound(k),
                "min_inradius": inradius,
                "inradius_bound": inradius_bound(k),
                "area_max_rel_err": area_error,
                "latitude_deviation": partition.latitude_deviation(),
                "locate_checked": config.samples,
                "locate_mismatches": int(mismatches),
                "ok": bool(
                    area_error <= 1e-9
                    and diameter <= partition_diameter_bound(k)
                    and inradius >= inradius_bound(k)
                    and mismatches == 0
                ),
            }
        )
    return reports[0] if len(reports) == 1 else reports


def _audit_triangulation(config: RunConfig) -> Dict[str, Any]:
    tri = build_triangulation(config.N)
    diameter = max_curvilinear_diameter(tri)
    angle = min_planar_angle(tri)
    report: Dict[str, Any] = {
        "N": tri.N,
        "faces": tri.face_count,
        "vertices": tri.vertex_count,
        "max_curv_diameter": diameter,
        "diameter_bound": diameter_bound(tri.N),
        "min_angle": angle,
        "theta0": MIN_ANGLE,
        "min_plane_distance": min_plane_distance(tri),
        "ok": bool(diameter <= diameter_bound(tri.N) and angle >= MIN_ANGLE),
    }
    if config.function_source is not None:
        f = _input(config)
        field = sample(f, tri)
        pts = random_unit_points(np.random.default_rng(config.seed), config.samples)
        exact = np.array([f.evaluate(p) for p in to_unit_points(pts)])
        sup_error = float(np.max(np.abs(exact - field.evaluate_many(pts))))
        bound = pl_sup_error_bound(f, field)
        report.update(pl_sup_error=sup_error, pl_sup_error_bound=bound)
        report["ok"] = bool(report["ok"] and sup_error <= bound)
    return report


def _reeb(config: RunConfig) -> Dict[str, Any]:
    field = sample(_input(config), build_triangulation(config.N))
    tree = build_reeb(field)
    graph = collapse(tree)
    if config.dump:
        return tree_to_json(graph)
    crit = critical_vertices(tree)
    return {
        "N": config.N,
        "nodes": tree.node_count,
        "root": tree.root,
        "max_depth": int(tree.depth.max()),
        "collapsed_nodes": graph.number_of_nodes(),
        "minima": len(crit["minima"]),
        "maxima": len(crit["maxima"]),
        "saddles": len(crit["saddles"]),
    }


def _verify(config: RunConfig, out) -> int:
    if not config.theorem2:
        raise ParameterError("verify needs a check to run, e.g. --theorem2")
    print("trial,lhs,rhs,passed", file=out)
    trials = theorem2_trials(
        config.N,
        config.trials,
        config.seed,
        progress=lambda t: print(f"{t.trial},{t.lhs!r},{t.rhs!r},{int(t.passed)}", file=out),
    )
    failed = [t for t in trials if not t.passed]
    print(f"theorem2 N={config.N}: {len(trials) - len(failed)}/{len(trials)} passed", file=sys.stderr)
    if failed:
        raise InvariantViolation(f"{len(failed)} trials violate |zeta_mu - zeta_nu| <= Lip * W_inf")
    return EXIT_OK


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def run(config: RunConfig) -> int:
    """Execute one subcommand and emit its artifact."""
    if config.subcommand == "verify":
        if config.output is None:
            return _verify(config, sys.stdout)
        with open(config.output, "w") as out:
            return _verify(config, out)
    if config.subcommand == "convergence":
        rotation = generic_rotation(config.seed) if config.rotate else None
        rows = run_sweep(config.function_source, config.N_list, config.lip_bound, rotation, config.workers)
        _emit(rows_to_csv(rows, config.reference), config.output)
        return EXIT_OK
    handlers = {
        "compute": _compute,
        "audit-partition": _audit_partition,
        "audit-triangulation": _audit_triangulation,
        "reeb": _reeb,
    }
    _emit(json.dumps(handlers[config.subcommand](config), indent=2) + "\n", config.output)
    return EXIT_OK


def _stage(err: BaseException) -> str:
    if isinstance(err, QuasiStateError):
        return err.stage
    return "io" if isinstance(err, OSError) else "invariant"


def report_error(err: BaseException) -> int:
    payload = {"error": type(err).__name__, "stage": _stage(err), "message": str(err)}
    print(json.dumps(payload), file=sys.stderr)
    return exit_code(err)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return run(config_from_args(args))
    except (QuasiStateError, OSError) as err:
        return report_error(err)
    except Exception as err:
        logger.debug("unexpected failure in %s", args.subcommand, exc_info=True)
        return report_error(err)


if __name__ == "__main__":
    sys.exit(main())
