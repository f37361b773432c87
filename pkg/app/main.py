import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from pydantic import BaseModel, ValidationError

from app.core.config import get_settings
from app.core.errors import McgError, ParseError
from app.core.logger import logger
from app.models.certificate import SearchConfig
from app.models.constants import BoundaryPlacement, ComponentKind, ProjectionParams
from app.models.curves import MappingClass, parse_generators, parse_matrix, parse_slope
from app.models.quadratic import rational_json
from app.models.run import OutputFormat, RunConfig, RunReport
from app.models.twist import TwistWord
from app.services.acceptance_service import AcceptanceService, render_text
from app.services.constants_service import ConstantsService
from app.services.farey_service import FareyService
from app.services.free_cert_service import FreeCertService
from app.services.growth_service import GrowthService, ball_table_rows
from app.services.twist_service import TwistService
from app.services.walk_service import WalkService


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError("expected a rational number", text)


def _dump(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    if isinstance(value, Fraction):
        return rational_json(value)
    if isinstance(value, list):
        return [_dump(v) for v in value]
    if isinstance(value, dict):
        return {k: _dump(v) for k, v in value.items()}
    return value


# Handlers return {"result": ...} plus optional "rows" (csv), "text" and "exit"

def cmd_classify(args) -> Dict:
    result = FareyService.classify(parse_matrix(args.matrix))
    return {"result": result}


def cmd_intersect(args) -> Dict:
    return {"result": FareyService.intersection(parse_slope(args.s1), parse_slope(args.s2))}


def cmd_distance(args) -> Dict:
    s1, s2 = parse_slope(args.s1), parse_slope(args.s2)
    result = FareyService.farey_distance(s1, s2, args.cap)
    payload: Dict[str, Any] = {"distance": result}
    if args.check:
        oracle = FareyService.brute_force_distance(s1, s2, args.box, args.cap)
        payload["oracle"] = oracle
        payload["agrees"] = oracle.distance == result.distance
        if not payload["agrees"]:
            raise McgError(f"continued fraction distance {result.distance} disagrees with BFS {oracle.distance}")
    return {"result": payload}


def cmd_translate(args) -> Dict:
    m, s = parse_matrix(args.matrix), parse_slope(args.slope)
    estimates = FareyService.translation_table(m, s, args.max_n)
    return {"result": {"estimates": estimates, "minimum": min(estimates)}}


def cmd_twist_check(args) -> Dict:
    if args.fuzz:
        return {"result": TwistService.fuzz_twist_inequality(instances=args.fuzz, seed=args.seed, strict=args.strict)}
    if None in (args.axis, args.power, args.delta, args.delta_prime):
        raise ParseError("twist-check needs --axis, --power, --delta and --delta-prime, or --fuzz", "")
    twist = TwistWord.single(parse_slope(args.axis), args.power)
    return {"result": TwistService.twist_inequality_check(
        twist, parse_slope(args.delta), parse_slope(args.delta_prime), strict=args.strict)}


def cmd_twist_pingpong(args) -> Dict:
    a = TwistWord.single(parse_slope(args.alpha), args.a_power)
    b = TwistWord.single(parse_slope(args.beta), args.b_power)
    sample = TwistService.slope_box(args.box) if args.box is not None else None
    return {"result": TwistService.verify_twist_pingpong(a, b, sample)}


def cmd_find_free(args) -> Dict:
    settings = get_settings()
    config = SearchConfig(
        max_power=settings.MAX_POWER if args.max_power is None else args.max_power,
        oracle_depth=settings.ORACLE_DEPTH if args.oracle_depth is None else args.oracle_depth,
        sample_box=settings.SAMPLE_BOX if args.sample_box is None else args.sample_box,
        precision_max=settings.PRECISION_LADDER_MAX,
    )
    return {"result": FreeCertService.find_short_independent(parse_generators(args.gens), config)}


def cmd_growth(args) -> Dict:
    table = GrowthService.ball_sizes(parse_generators(args.gens), args.radius, args.cap)
    result: Any = table
    if len(table.sizes) >= args.window + 2:
        result = GrowthService.growth_estimate(table, args.window)
    rows = [("radius", "size", "rate")] + ball_table_rows(table)
    return {"result": result, "rows": rows}


def cmd_walk(args) -> Dict:
    if args.free_rank:
        table = WalkService.free_radial_return_probs(args.free_rank, args.steps)
        generators: List[MappingClass] = []
    else:
        if not args.gens:
            raise ParseError("walk needs --gens or --free-rank", "")
        generators = parse_generators(args.gens)
        if args.symmetrize:
            generators = generators + [g.inverse() for g in generators]
        if args.mc:
            result = WalkService.monte_carlo(generators, args.steps, args.mc, args.seed)
            rows = [("step", "returns", "frequency", "stderr")] + [
                (n, r, f"{f:.12f}", f"{e:.12f}")
                for n, (r, f, e) in enumerate(zip(result.returns, result.frequencies, result.standard_errors))]
            return {"result": result, "rows": rows}
        table = WalkService.return_probs(generators, args.steps)

    result = {"table": table}
    if len(table.probs) >= 3:
        result["rho"] = WalkService.rho_estimate(table).model_dump(mode="json", exclude={"table"})
    if args.free_rank and args.free_rank >= 2:
        result["kesten_radius"] = WalkService.kesten_free_radius(args.free_rank).to_json()
    rows = [("step", "num", "den", "decimal")] + [
        (n, p.numerator, p.denominator, f"{float(p):.12e}") for n, p in enumerate(table.probs)]
    return {"result": result, "rows": rows}


def cmd_constants(args) -> Dict:
    c_values = args.c or [Fraction(1)]
    result: Dict[str, Any] = {"p1": ConstantsService.p1_constant(c_values)}
    if args.p0 is not None:
        result["main_lemma_power"] = ConstantsService.main_lemma_power(c_values, args.p0)
    if args.search:
        search = ConstantsService.threshold_search(args.scan_cap, args.additive)
        result.update({"D_in_min": search.D_in_min, "sum_min": search.sum_min, "search": search})
    params = ProjectionParams(c=c_values[0], D_in=args.D_in, D_out=args.D_out)
    p = args.p if args.p is not None else int(result["p1"]) + 1
    result["chain"] = ConstantsService.chain_verify(params, p, args.m, additive=args.additive)
    if args.simulate is not None:
        result["simulation"] = ConstantsService.simulate_relpa_pingpong(params, p, args.simulate, args.seed)
    if args.dispatch:
        result["dispatch"] = ConstantsService.relpa_dispatch(
            ComponentKind(args.dispatch), args.boundary_a and BoundaryPlacement(args.boundary_a),
            args.boundary_b and BoundaryPlacement(args.boundary_b), params, p)
    return {"result": result}


def cmd_reproduce(args) -> Dict:
    report = AcceptanceService.reproduce(quick=args.quick, seed=args.seed)
    return {"result": report, "text": render_text(report), "exit": 0 if report.passed else 1}


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.JSON.value)
    common.add_argument("--json", dest="format", action="store_const", const=OutputFormat.JSON.value)
    common.add_argument("--csv", dest="format", action="store_const", const=OutputFormat.CSV.value)
    common.add_argument("--seed", type=int, default=settings.SEED)

    parser = argparse.ArgumentParser(prog="mcg", description="Mapping classes of the once-punctured torus")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = command("classify", cmd_classify, "identity / finite order / Dehn twist / pseudo-Anosov")
    p.add_argument("matrix")

    p = command("intersect", cmd_intersect, "geometric intersection number of two slopes")
    p.add_argument("s1")
    p.add_argument("s2")

    p = command("distance", cmd_distance, "Farey graph distance")
    p.add_argument("s1")
    p.add_argument("s2")
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--check", action="store_true", help="cross-check with bounded BFS")
    p.add_argument("--box", type=int, default=None)

    p = command("translate", cmd_translate, "translation estimates of a pseudo-Anosov")
    p.add_argument("matrix")
    p.add_argument("slope")
    p.add_argument("--max-n", type=int, default=10)

    p = command("twist-check", cmd_twist_check, "intersection after Dehn twisting")
    p.add_argument("--axis")
    p.add_argument("--power", type=int)
    p.add_argument("--delta")
    p.add_argument("--delta-prime")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--fuzz", type=int, default=0, help="number of random instances")

    p = command("twist-pingpong", cmd_twist_pingpong, "ping-pong certificate for two twist powers")
    p.add_argument("--alpha", required=True)
    p.add_argument("--a-power", type=int, required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--b-power", type=int, required=True)
    p.add_argument("--box", type=int, default=None)

    p = command("find-free", cmd_find_free, "short independent words in a generating set")
    p.add_argument("--gens", required=True, help="matrices separated by ';'")
    p.add_argument("--max-power", type=int, default=None)
    p.add_argument("--oracle-depth", type=int, default=None)
    p.add_argument("--sample-box", type=int, default=None)

    p = command("growth", cmd_growth, "ball sizes and growth rate")
    p.add_argument("--gens", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--cap", type=int, default=None)

    p = command("walk", cmd_walk, "random walk return probabilities")
    p.add_argument("--gens")
    p.add_argument("--free-rank", type=int, default=None)
    p.add_argument("--symmetrize", action="store_true", help="append the inverses of --gens")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--exact", action="store_true", help="exact dynamic programming (default)")
    p.add_argument("--mc", type=int, default=None, help="Monte Carlo trials")

    p = command("constants", cmd_constants, "Behrstock and relative pseudo-Anosov constants")
    p.add_argument("--c", type=_rational, action="append")
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--p0", type=_rational, default=None)
    p.add_argument("--D-in", dest="D_in", type=int, default=10)
    p.add_argument("--D-out", dest="D_out", type=int, default=4)
    p.add_argument("--additive", type=int, default=2)
    p.add_argument("--search", action="store_true")
    p.add_argument("--scan-cap", type=int, default=100)
    p.add_argument("--simulate", type=int, default=None, help="trajectory length")
    p.add_argument("--dispatch", choices=[k.value for k in ComponentKind])
    p.add_argument("--boundary-a", choices=[b.value for b in BoundaryPlacement])
    p.add_argument("--boundary-b", choices=[b.value for b in BoundaryPlacement])

    p = command("reproduce", cmd_reproduce, "run the acceptance suite")
    p.add_argument("--quick", action="store_true")

    return parser


def _run_config(args) -> RunConfig:
    settings = get_settings()
    inputs = {k: v for k, v in vars(args).items() if k not in ("handler", "command", "format", "seed")}
    caps = {
        "ball_cap": settings.BALL_CAP,
        "walk_state_cap": settings.WALK_STATE_CAP,
        "distance_cap": settings.DISTANCE_CAP,
        "oracle_depth": settings.ORACLE_DEPTH,
        "max_power": settings.MAX_POWER,
        "precision_ladder_max": settings.PRECISION_LADDER_MAX,
    }
    return RunConfig(subcommand=args.command, inputs=_dump(inputs), caps=caps, seed=args.seed,
                     output_format=OutputFormat(args.format))


def render(outcome: Dict, report: RunReport) -> str:
    fmt = report.config.output_format
    if fmt == OutputFormat.CSV and outcome.get("rows"):
        buffer = io.StringIO()
        csv.writer(buffer, lineterminator="\n").writerows(outcome["rows"])
        return buffer.getvalue().rstrip("\n")
    if fmt == OutputFormat.TEXT:
        if outcome.get("text"):
            return outcome["text"]
        result = report.result
        if isinstance(result, dict):
            return "\n".join(f"{k}: {json.dumps(v, ensure_ascii=False)}" for k, v in result.items())
        return json.dumps(result, ensure_ascii=False)
    return json.dumps(report.model_dump(mode="json"), indent=2, ensure_ascii=False)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    try:
        outcome = args.handler(args)
        report = RunReport(app=settings.APP_NAME, version=settings.VERSION, config=_run_config(args),
                           result=_dump(outcome["result"]))
    except ParseError as e:
        parser.error(str(e))
    except (McgError, ValidationError) as e:
        code = getattr(e, "exit_code", 2)
        logger.error(f"{args.command}: {e}", exc_info=code == 1, extra={"operation": args.command})
        diagnostics = getattr(e, "diagnostics", None)
        error = {"error": type(e).__name__, "message": str(e)}
        if diagnostics:
            error["diagnostics"] = _dump(diagnostics)
        print(json.dumps(error, indent=2, ensure_ascii=False), file=sys.stderr)
        return code
    except Exception as e:
        logger.error(f"Internal error in {args.command}: {e}", exc_info=True, extra={"operation": args.command})
        return 1

    print(render(outcome, report))
    return outcome.get("exit", 0)


if __name__ == "__main__":
    sys.exit(main())
