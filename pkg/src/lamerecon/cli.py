"""Command-line interface: `lamerecon <subcommand>`."""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .config import load_pipeline_config, settings
from .errors import ContractViolation, LameReconError, StageError
from .io import load_bundle, read_field, save_bundle, save_heatmap, save_traces, write_field, write_json
from .models import (
    DesignVariant, ForwardManifest, Grid, LambdaRecoveryReport, LameParameters, Mask,
    MuRecoveryReport, Rank, RecoveryMode, Variant
)
from .pipeline import ReconstructionPipeline, run_pipeline
from .tools import (
    CgoDesigner, Eliminator, MuRecovery, build_transport, inject_noise, kappa_sigma_from,
    lambda_with_inpainting, metrics, recover_lambda, reduce_fields
)

logger = logging.getLogger("lamerecon")


def configure_logging(level: Optional[str] = None) -> None:
    """Root logging from settings, plus a file handler when log_file is set."""
    level = (level or settings.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    if settings.log_file:
        handler = logging.FileHandler(settings.log_file)
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        logging.getLogger().addHandler(handler)


def _parse_points(text: str, dim: int) -> List[tuple]:
    points = []
    for chunk in text.split(";"):
        coords = tuple(float(c) for c in chunk.split(",") if c.strip())
        if len(coords) != dim:
            raise ContractViolation(f"Point {chunk!r} does not have {dim} coordinates")
        points.append(coords)
    return points


def _mask_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_mask{path.suffix}")


def _guess_parameters(text: str, dim: int, grid_points: int) -> LameParameters:
    """"c" or "lam,mu" constants on the unit grid, or "lambda.lfld,mu.lfld" field files."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise ContractViolation(f"--guess needs 'lam,mu' or 'lambda.lfld,mu.lfld', got {text!r}")
    try:
        lam, mu = float(parts[0]), float(parts[1])
    except ValueError:
        return LameParameters(lam=read_field(parts[0], Rank.SCALAR),
                              mu=read_field(parts[1], Rank.SCALAR)).check_positive()
    return LameParameters.constant(Grid.unit(dim, grid_points), lam, mu).check_positive()


# subcommands

def cmd_forward(args: argparse.Namespace) -> None:
    config = load_pipeline_config(args.config)
    config = config.model_copy(update={"output_dir": str(args.out)})
    pipeline = ReconstructionPipeline(config)
    params = pipeline.build_phantoms()
    traces, _ = pipeline.build_boundary(params)
    _, reports = asyncio.run(pipeline.solve_forward(params, traces))
    summary = ForwardManifest(grid=params.grid.model_dump(mode="json"), k=config.k, solutions=reports)
    write_json(summary, Path(args.out) / "forward.json")
    logger.info(f"Wrote {len(reports)} forward solutions to {args.out}")


def cmd_reduce(args: argparse.Namespace) -> None:
    fields = [read_field(p, Rank.VECTOR) for p in args.inputs]
    labels = [Path(p).stem for p in args.inputs]
    bundle = reduce_fields(fields, Variant(args.variant), labels)
    save_bundle(bundle, args.out)


def cmd_diagnose(args: argparse.Namespace) -> None:
    bundle = load_bundle(args.bundle)
    plan = Eliminator(sigma_min_rel=args.sigma_min_rel).independence_map(bundle)
    sigma_path, mask_path = (Path(p) for p in args.out)
    write_field(plan.sigma_field(), sigma_path)
    write_field(plan.mask.as_field(), mask_path)
    save_heatmap(plan.sigma_field(), sigma_path.with_suffix(".png"), mask=plan.mask)
    logger.info(f"Mask covers {plan.mask.interior_fraction:.1%} of the interior")


def _eliminated(bundle_dir: str, variant: Variant, sigma_min_rel: Optional[float]):
    bundle = load_bundle(bundle_dir)
    if bundle.variant is not variant:
        raise ContractViolation(f"Bundle in {bundle_dir} is {bundle.variant.value}-variant, "
                                f"need {variant.value}")
    return Eliminator(sigma_min_rel=sigma_min_rel).eliminate(bundle)


def cmd_reconstruct_mu(args: argparse.Namespace) -> None:
    _, combined = _eliminated(args.bundle, Variant.MU, args.sigma_min_rel)
    system = build_transport(combined, args.k)
    try:
        boundary_mu = float(args.boundary_mu)
    except ValueError:
        boundary_mu = read_field(args.boundary_mu, Rank.SCALAR)
    mode = RecoveryMode(args.mode)
    result = MuRecovery().recover_global(system, boundary_mu, mode=mode, compare_modes=args.compare)
    mu_path, report_path = (Path(p) for p in args.out)
    write_field(result.mu, mu_path)
    write_field(result.recovered.as_field(), _mask_path(mu_path))
    save_heatmap(result.mu, mu_path.with_suffix(".png"), mask=result.recovered)
    report = MuRecoveryReport(
        mode=mode, recovered_fraction=result.recovered.interior_fraction,
        unreachable_points=result.unreachable.count, nonpositive_points=result.nonpositive.count,
        mode_disagreement_sup=(float(result.disagreement.values.max())
                               if result.disagreement is not None else None))
    write_json(report, report_path)


def cmd_reconstruct_lambda(args: argparse.Namespace) -> None:
    _, combined = _eliminated(args.bundle, Variant.LAMBDA, args.sigma_min_rel)
    mu = read_field(args.mu, Rank.SCALAR)
    ks = kappa_sigma_from(combined, mu.grid.dim)
    mu_mask = _mask_path(Path(args.mu))
    if mu_mask.exists():
        usable = Mask(grid=mu.grid, flags=read_field(mu_mask, Rank.SCALAR).values > 0.5)
        ks = ks.model_copy(update={"mask": ks.mask & usable})
    result = recover_lambda(ks, mu, args.k)
    if args.inpaint:
        result = lambda_with_inpainting(result)
    lam_path, report_path = (Path(p) for p in args.out)
    write_field(result.lam, lam_path)
    write_field(result.recovered.as_field(), _mask_path(lam_path))
    save_heatmap(result.lam, lam_path.with_suffix(".png"), mask=result.recovered)
    write_json(LambdaRecoveryReport(recovered_fraction=result.recovered.interior_fraction,
                                    negative_points=result.negative.count,
                                    extrapolated_points=result.extrapolated.count), report_path)


def cmd_design_bc(args: argparse.Namespace) -> None:
    guess = _guess_parameters(args.guess, args.dim, args.grid)
    dim = guess.grid.dim
    anchors = _parse_points(args.anchors, dim) if args.anchors else [(0.5,) * dim]
    traces, report = CgoDesigner().design_boundary_set(guess, DesignVariant(args.variant), anchors,
                                                       args.tau, args.k)
    save_traces(traces, args.out)
    write_json(report, Path(args.out) / "design_report.json")


def cmd_noise(args: argparse.Namespace) -> None:
    fields = [read_field(p) for p in args.inputs]
    noisy = inject_noise(fields, args.amplitude, args.kernel_width, args.seed)
    out = Path(args.out)
    for path, field in zip(args.inputs, noisy):
        write_field(field, out / Path(path).name)


def cmd_metrics(args: argparse.Namespace) -> None:
    recovered = read_field(args.recovered, Rank.SCALAR)
    truth = read_field(args.truth, Rank.SCALAR)
    mask = None
    if args.mask:
        mask = Mask(grid=recovered.grid, flags=read_field(args.mask, Rank.SCALAR).values > 0.5)
    report = metrics(recovered, truth, mask)
    if args.out:
        write_json(report, args.out)
    print(report.model_dump_json(indent=2))


def cmd_pipeline(args: argparse.Namespace) -> None:
    config = load_pipeline_config(args.config)
    if args.out:
        config = config.model_copy(update={"output_dir": str(args.out)})
    manifest = asyncio.run(run_pipeline(config))
    if manifest.mu_metrics and manifest.lambda_metrics:
        print(f"mu sup rel error {manifest.mu_metrics.sup_rel:.3e} "
              f"(coverage {manifest.mu_metrics.interior_coverage:.1%}); "
              f"lambda sup rel error {manifest.lambda_metrics.sup_rel:.3e} "
              f"(coverage {manifest.lambda_metrics.interior_coverage:.1%})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lamerecon",
                                     description="Lamé parameter reconstruction from internal data")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides LAMERECON_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forward", help="solve the forward problem for a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_forward)

    p = sub.add_parser("reduce", help="reduce displacement fields to a bundle")
    p.add_argument("--variant", choices=[v.value for v in Variant], required=True)
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("diagnose", help="independence map of a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", nargs=2, metavar=("SIGMA", "MASK"), required=True)
    p.add_argument("--sigma-min-rel", type=float, default=None)
    p.set_defaults(handler=cmd_diagnose)

    p = sub.add_parser("reconstruct", help="recover mu or lambda from a bundle")
    rsub = p.add_subparsers(dest="target", required=True)
    r = rsub.add_parser("mu")
    r.add_argument("--bundle", required=True)
    r.add_argument("--boundary-mu", required=True, help="constant or LFLD file")
    r.add_argument("--mode", choices=[m.value for m in RecoveryMode], default=RecoveryMode.LS.value)
    r.add_argument("--compare", action="store_true", help="also run the other mode and report the gap")
    r.add_argument("--k", type=float, default=0.0)
    r.add_argument("--sigma-min-rel", type=float, default=None)
    r.add_argument("--out", nargs=2, metavar=("MU", "REPORT"), required=True)
    r.set_defaults(handler=cmd_reconstruct_mu)
    r = rsub.add_parser("lambda")
    r.add_argument("--bundle", required=True)
    r.add_argument("--mu", required=True)
    r.add_argument("--k", type=float, default=0.0)
    r.add_argument("--inpaint", action="store_true")
    r.add_argument("--sigma-min-rel", type=float, default=None)
    r.add_argument("--out", nargs=2, metavar=("LAMBDA", "REPORT"), required=True)
    r.set_defaults(handler=cmd_reconstruct_lambda)

    p = sub.add_parser("design-bc", help="design boundary data from CGO solutions")
    p.add_argument("--guess", default="1.0,1.0", help="'c', 'lam,mu' constants or 'lambda.lfld,mu.lfld'")
    p.add_argument("--variant", choices=[v.value for v in DesignVariant], required=True)
    p.add_argument("--anchors", default="", help="'x,y;x,y' (default: domain center)")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--grid", type=int, default=65, help="points per axis for constant guesses")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_design_bc)

    p = sub.add_parser("noise", help="add smoothed noise to fields")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--amplitude", type=float, required=True)
    p.add_argument("--kernel-width", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_noise)

    p = sub.add_parser("metrics", help="compare a recovered field with the truth")
    p.add_argument("--recovered", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--mask", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("pipeline", help="run a full experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_pipeline)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    stage = args.command if args.command != "reconstruct" else f"reconstruct-{args.target}"
    try:
        args.handler(args)
    except StageError as e:
        print(f"lamerecon: {e}", file=sys.stderr)
        return 2
    except (LameReconError, FileNotFoundError) as e:
        logger.error(f"{stage} failed: {e}")
        print(f"lamerecon: [{stage}] {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0
