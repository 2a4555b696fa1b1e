"""
Command-line entry point: python -m src.cli <subcommand> ...

Machine output (JSON, NDJSON, CSV) goes to stdout, progress and summaries to
stderr. Exit codes: 0 success, 1 verification failure, 2 input error.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
from pydantic import ValidationError

from src import __version__
from src.benchmark import run_bench
from src.bipartition import BipartitionProposal, delta_m_decomposed, delta_m_direct, laplacian_identity_check
from src.config import get_settings
from src.detector import compare_detectors, detect
from src.errors import ModDensError, ParameterError, PartitionError
from src.generators import generate
from src.graph import is_connected
from src.loaders import load_graph, load_partition, load_side, save_graph, save_partition
from src.metrics import analytic_suite, evaluate, modularity_density_tensor, threshold_grid
from src.models import DetectorConfig, Family, GeneratorSpec, InitMode, MetricName, MetricReport, MoveOrder, TraceStep
from src.oracle import exhaustive_best
from src.verification import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


def _banner(title: str) -> None:
    print("\n" + "=" * 60, file=sys.stderr)
    print(title, file=sys.stderr)
    print("=" * 60, file=sys.stderr)


def _emit(text: str) -> None:
    sys.stdout.write(text + "\n")


def cmd_metric(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    p = load_partition(args.partition, g)
    metric = MetricName(args.metric)
    if metric == MetricName.D and args.form != "sum":
        raise ParameterError("Li's D has only the sum form")

    if args.form == "tensor":
        report = MetricReport(metric=metric, M=modularity_density_tensor(g, p), connected=is_connected(g))
        _emit(report.to_json())
        return EXIT_OK

    report = evaluate(g, p, metric)
    status = EXIT_OK
    if args.form == "both":
        tensor = modularity_density_tensor(g, p)
        report.residual = abs(report.M - tensor)
        if report.residual > get_settings().tolerance * max(1.0, abs(report.M)):
            logger.error("Sum and tensor forms disagree: %.12g vs %.12g", report.M, tensor)
            status = EXIT_FAILED
    _emit(report.to_json())
    return status


def _trace_frame(trace: List[TraceStep]) -> pd.DataFrame:
    return pd.DataFrame([step.model_dump() for step in trace], columns=list(TraceStep.model_fields))


def cmd_detect(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    cfg = DetectorConfig(
        metric=MetricName(args.metric),
        seed=args.seed,
        max_passes=args.max_passes or get_settings().detector_max_passes,
        init=InitMode(args.init),
        move_order=MoveOrder(args.move_order),
        min_gain=args.min_gain,
        validate_steps=args.validate_steps or get_settings().validate_detector_steps,
    )
    initial = None
    if cfg.init == InitMode.GIVEN_PARTITION:
        if not args.partition:
            raise PartitionError("--init given-partition needs --partition")
        initial = load_partition(args.partition, g)

    partition, report, trace = detect(g, cfg, initial)
    if args.output:
        save_partition(partition, g, args.output)
    if args.trace:
        _trace_frame(trace).to_csv(args.trace, index=False)
    _emit(report.to_json())
    summary = f"{partition.cluster_count} clusters, {cfg.metric.value} = {report.M:.6g}, {len(trace)} steps"
    print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    truth = load_partition(args.truth, g) if args.truth else None
    cfg = DetectorConfig(seed=args.seed, init=InitMode(args.init))
    comparison = compare_detectors(g, [MetricName(m) for m in args.metrics], cfg, truth=truth)
    _emit(comparison.to_json())
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(
        family=Family(args.family), sizes=args.sizes, probs=args.probs, bridge_count=args.w, seed=args.seed
    )
    labeled = generate(spec)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_graph(labeled.graph, out / "graph.txt")
    save_partition(labeled.truth, labeled.graph, out / "truth.txt")
    metadata = labeled.metadata().to_json()
    (out / "metadata.json").write_text(metadata + "\n", encoding="utf-8")
    analytic = pd.DataFrame([q.model_dump() for q in analytic_suite(spec)], columns=["quantity", "closed_form_value"])
    analytic.to_csv(out / "analytic.csv", index=False)
    _emit(metadata)
    print(f"Wrote {labeled.graph} to {out}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    result = exhaustive_best(g, MetricName(args.metric), args.max_nodes)
    _emit(result.to_json())
    return EXIT_OK


def cmd_bipartition(args: argparse.Namespace) -> int:
    g = load_graph(args.graph)
    p = load_partition(args.partition, g)
    side_a = load_side(args.proposal, g)
    cluster = p.cluster_of(side_a[0])
    proposal = BipartitionProposal.from_side(p, cluster, side_a)
    result = delta_m_decomposed(g, p, proposal)
    direct = delta_m_direct(g, p, proposal)
    residual = laplacian_identity_check(g, p, proposal)
    _emit(result.to_json())

    tolerance = get_settings().tolerance
    if abs(direct - result.delta_m) > tolerance * max(1.0, abs(direct)) or residual > tolerance:
        logger.error("Decomposition disagrees with the direct δM (%.12g vs %.12g)", result.delta_m, direct)
        return EXIT_FAILED
    return EXIT_OK


def _sortable(value: Any) -> Tuple:
    """Numbers compare numerically, lists element-wise, anything else as text"""
    if isinstance(value, bool) or value is None:
        return (2, str(value))
    if isinstance(value, (int, float)):
        return (0, float(value))
    if isinstance(value, (list, tuple)):
        return (1, tuple(_sortable(v) for v in value))
    try:
        return (0, float(value))
    except (TypeError, ValueError):
        return (2, str(value))


def _canonical_key(check: Dict[str, Any]) -> Tuple:
    """Order NDJSON checks by claim name, then by their parameters as numbers"""
    name, _, rest = check["claim_id"].partition("(")
    params = []
    for item in rest.rstrip(")").split(","):
        key, _, value = item.partition("=")
        params.append((key, _sortable(value)))
    family = tuple((key, _sortable(value)) for key, value in sorted(check["family"].items()))
    return name, tuple(params), family


def cmd_verify(args: argparse.Namespace) -> int:
    _banner(f"Verify suite: {args.suite}")
    report = run_suite(args.suite, args.seeds)
    digits = get_settings().report_significant_digits
    for check in sorted(report.to_dict()["checks"], key=_canonical_key):
        _emit(json.dumps({"schema_version": report.schema_version, **check}, sort_keys=False))
    failures = report.failures
    print(f"{len(report.checks)} checks, {len(failures)} failed (rounded to {digits} digits)", file=sys.stderr)
    for check in failures[:20]:
        print(f"  FAIL {check.claim_id} {check.family}: margin {check.margin:.3g}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_bench(args: argparse.Namespace) -> int:
    _banner("Timing modularity density evaluation")
    report = run_bench(args.edges, args.seed, args.min_edges, args.steps, args.repeats)
    if args.csv:
        pd.DataFrame([pt.model_dump() for pt in report.points]).to_csv(args.csv, index=False)
    _emit(report.to_json())
    if report.slope is not None:
        print(f"log-log slope: {report.slope:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_threshold(args: argparse.Namespace) -> int:
    sizes = args.sizes or list(range(3, args.max_size + 1))
    frame = threshold_grid(sizes)
    if args.output:
        frame.to_csv(args.output, index=False, float_format="%.12g")
    else:
        sys.stdout.write(frame.to_csv(index=False, float_format="%.12g"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="moddens", description=settings.app_name)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level for stderr output")
    sub = parser.add_subparsers(dest="command", required=True)

    metric = sub.add_parser("metric", help="Evaluate M or Li's D for a partition")
    metric.add_argument("graph")
    metric.add_argument("partition")
    metric.add_argument("--metric", choices=[m.value for m in MetricName], default="M")
    metric.add_argument("--form", choices=["sum", "tensor", "both"], default="sum")
    metric.set_defaults(handler=cmd_metric)

    det = sub.add_parser("detect", help="Greedy community detection")
    det.add_argument("graph")
    det.add_argument("--metric", choices=[m.value for m in MetricName], default="M")
    det.add_argument("--seed", type=int, default=settings.seed, help="Defaults to MODDENS_SEED")
    det.add_argument("--max-passes", type=int, default=None)
    det.add_argument("--min-gain", type=float, default=1e-9)
    det.add_argument("--init", choices=[m.value for m in InitMode], default=InitMode.SINGLETONS.value)
    det.add_argument("--move-order", choices=[m.value for m in MoveOrder], default=MoveOrder.NODE_ID.value)
    det.add_argument("--partition", help="Initial partition for --init given-partition")
    det.add_argument("--output", help="Write the found partition here")
    det.add_argument("--trace", help="Write accepted steps as CSV here")
    det.add_argument("--validate-steps", action="store_true", help="Recompute M after every accepted step")
    det.set_defaults(handler=cmd_detect)

    cmp_ = sub.add_parser("compare", help="Run the detector under several objectives")
    cmp_.add_argument("graph")
    cmp_.add_argument("--truth", help="Ground-truth partition file")
    cmp_.add_argument("--metrics", nargs="+", choices=[m.value for m in MetricName], default=["M", "D"])
    cmp_.add_argument("--seed", type=int, default=settings.seed)
    cmp_.add_argument("--init", choices=[m.value for m in InitMode], default=InitMode.SINGLETONS.value)
    cmp_.set_defaults(handler=cmd_compare)

    gen = sub.add_parser("generate", help="Generate a synthetic family instance")
    gen.add_argument("family", choices=[f.value for f in Family])
    gen.add_argument("--sizes", type=int, nargs="+", required=True)
    gen.add_argument("--probs", type=float, nargs="+", default=None)
    gen.add_argument("--w", type=int, default=1, help="Bridge count for two_cliques_w_bridge")
    gen.add_argument("--seed", type=int, default=settings.seed, help="Defaults to MODDENS_SEED")
    gen.add_argument("--output-dir", required=True)
    gen.set_defaults(handler=cmd_generate)

    orc = sub.add_parser("oracle", help="Exhaustive argmax over all set partitions")
    orc.add_argument("graph")
    orc.add_argument("--metric", choices=[m.value for m in MetricName], default="M")
    orc.add_argument("--max-nodes", type=int, default=None)
    orc.set_defaults(handler=cmd_oracle)

    bip = sub.add_parser("bipartition", help="δM of splitting one cluster, with its decomposition")
    bip.add_argument("graph")
    bip.add_argument("partition")
    bip.add_argument("proposal", help="File listing the node labels of side a")
    bip.set_defaults(handler=cmd_bipartition)

    ver = sub.add_parser("verify", help="Run the verification suites")
    ver.add_argument("--suite", choices=SUITES, default="all")
    ver.add_argument("--seeds", type=int, default=None, help="Random samples per seeded check")
    ver.set_defaults(handler=cmd_verify)

    ben = sub.add_parser("bench", help="Time metric evaluation against |E|")
    ben.add_argument("--edges", type=int, default=settings.bench_max_edges)
    ben.add_argument("--min-edges", type=int, default=None)
    ben.add_argument("--steps", type=int, default=None)
    ben.add_argument("--repeats", type=int, default=None)
    ben.add_argument("--seed", type=int, default=settings.seed)
    ben.add_argument("--csv", help="Also write the timing points as CSV")
    ben.set_defaults(handler=cmd_bench)

    thr = sub.add_parser("threshold", help="w_M / w_D ratio grid as CSV")
    thr.add_argument("--max-size", type=int, default=settings.verify_threshold_grid_max)
    thr.add_argument("--sizes", type=int, nargs="+", default=None)
    thr.add_argument("--output", help="CSV path (stdout when omitted)")
    thr.set_defaults(handler=cmd_threshold)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except (ModDensError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
