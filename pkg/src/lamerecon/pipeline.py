"""Async orchestration of a full reconstruction experiment."""

import asyncio
import hashlib
import json
import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import PIL
import pydantic
import scipy

from . import __version__
from .errors import LameReconError, StageError
from .io import field_digest, save_bundle, save_heatmap, save_traces, load_traces, write_field, write_json
from .models import (
    BoundaryData, BoundarySource, ComplexDirection, DesignReport, ForwardReport, Grid, GridField,
    LambdaRecoveryReport, LameParameters, MuRecoveryReport, PipelineConfig, RunManifest
)
from .phantoms import BASE_DIRECTIONS, boundary_family, lame_phantom
from .tools import (
    CgoDesigner, Eliminator, ForwardSolver, MuRecovery, build_transport, inject_noise,
    kappa_sigma_from, lambda_with_inpainting, metrics, recover_lambda, reduce_lambda, reduce_mu,
    tau_sweep
)
from .tools.metrics import error_field


def config_hash(config: PipelineConfig) -> str:
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def library_versions() -> Dict[str, str]:
    return {"numpy": np.__version__, "scipy": scipy.__version__,
            "pydantic": pydantic.VERSION, "Pillow": PIL.__version__}


class ReconstructionPipeline:
    """Runs phantoms → boundary data → forward → noise → reduce → diagnose → μ → λ → metrics."""

    MANIFEST = "manifest.json"
    TIMINGS = "timings.json"

    def __init__(self, config: PipelineConfig):
        """Initialize the pipeline with its workers."""
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.solver = ForwardSolver(cond_cap=config.solver_cond_cap)
        self.eliminator = Eliminator(sigma_min_rel=config.sigma_min_rel,
                                     max_targets=config.max_targets)
        self.mu_recovery = MuRecovery()
        self.designer = CgoDesigner()
        self.artifacts: Dict[str, str] = {}
        self.timings: Dict[str, float] = {}

    async def _stage(self, stage: str, func: Callable, *args, **kwargs) -> Any:
        """Run one stage, timing it and tagging any failure with the stage name."""
        start = time.perf_counter()
        try:
            result = func(*args, **kwargs)
            if asyncio.iscoroutine(result):
                result = await result
        except StageError:
            raise
        except Exception as e:
            self.logger.error(f"Stage {stage} failed: {type(e).__name__}: {e}")
            raise StageError(stage, e) from e
        finally:
            self.timings[stage] = time.perf_counter() - start
        self.logger.info(f"Stage {stage} done in {self.timings[stage]:.2f}s")
        return result

    def _write(self, field: GridField, relative: str) -> None:
        write_field(field, self.output_dir / relative)
        self.artifacts[relative] = field_digest(field)

    # stages

    def build_phantoms(self) -> LameParameters:
        c = self.config
        grid = Grid.unit(c.dim, c.grid_points)
        params = lame_phantom(grid, c.lambda_phantom, c.lambda_base, c.lambda_amplitude,
                              c.mu_phantom, c.mu_base, c.mu_amplitude)
        self._write(params.lam, "phantoms/lambda_true.lfld")
        self._write(params.mu, "phantoms/mu_true.lfld")
        return params

    def build_boundary(self, params: LameParameters) -> Tuple[List[BoundaryData], Optional[DesignReport]]:
        c = self.config
        grid = params.grid
        report = None
        if c.boundary_source is BoundarySource.DESIGNED:
            guess = LameParameters.constant(grid, c.lambda_base, c.mu_base)
            traces, report = self.designer.design_boundary_set(
                guess, c.design_variant, c.anchor_points(), c.design_tau, c.k)
            write_json(report, self.output_dir / "boundary" / "design_report.json")
        elif c.boundary_source is BoundarySource.FAMILY:
            traces = boundary_family(c.boundary_family, grid, c.boundary_count)
        else:
            if not c.boundary_dir:
                raise LameReconError("boundary_source=file needs boundary_dir")
            traces = load_traces(c.boundary_dir)
            for t in traces:
                if not t.grid.same_as(grid):
                    raise LameReconError(f"Trace {t.label} is not on the {grid.extents} grid")
        save_traces(traces, self.output_dir / "boundary")
        return traces, report

    async def solve_forward(self, params: LameParameters,
                            traces: List[BoundaryData]) -> Tuple[List[GridField], List[ForwardReport]]:
        k = self.config.k
        results = await asyncio.gather(
            *[asyncio.to_thread(self.solver.solve_boundary, params, k, g) for g in traces])
        fields, reports = [], []
        for j, (g, result) in enumerate(zip(traces, results)):
            self._write(result.displacement, f"forward/u_{j:03d}.lfld")
            fields.append(result.displacement)
            reports.append(self.solver.report(result, params, k, label=g.label or f"u{j}"))
        return fields, reports

    def add_noise(self, fields: List[GridField]) -> List[GridField]:
        c = self.config
        noisy = inject_noise(fields, c.noise_amplitude, c.noise_kernel_width, c.seed)
        if c.noise_amplitude > 0:
            for j, f in enumerate(noisy):
                self._write(f, f"data/u_{j:03d}.lfld")
        return noisy

    def reduce(self, fields: List[GridField], labels: List[str]):
        bundles = (reduce_mu(fields, labels), reduce_lambda(fields, labels))
        for b in bundles:
            save_bundle(b, self.output_dir / "bundles" / b.variant.value)
            for j in range(b.count):
                for kind, f in (("sharp", b.sharp[j]), ("flat", b.flat[j]), ("star", b.star[j])):
                    self.artifacts[f"bundles/{b.variant.value}/{kind}_{j:03d}.lfld"] = field_digest(f)
        return bundles

    def diagnose(self, bundles) -> Tuple[Dict[str, Any], Dict[str, float]]:
        out, coverage = {}, {}
        for bundle in bundles:
            name = bundle.variant.value
            plan, combined = self.eliminator.eliminate(bundle)
            residual = max(float(self.eliminator.annihilation_residual(
                plan, bundle, self.eliminator.solve_theta(plan, bundle, t)).max())
                for t in range(plan.target_count))
            coverage[name] = plan.mask.interior_fraction
            coverage[f"{name}_annihilation_sup"] = residual
            self._write(plan.sigma_field(), f"diagnose/{name}_sigma.lfld")
            self._write(plan.mask.as_field(), f"diagnose/{name}_mask.lfld")
            save_heatmap(plan.sigma_field(), self.output_dir / "diagnose" / f"{name}_sigma.png",
                         mask=plan.mask)
            if plan.mask.interior_fraction < 0.5:
                self.logger.warning(f"{name}-variant mask covers only "
                                    f"{plan.mask.interior_fraction:.1%} of the interior")
            out[name] = (plan, combined)
        return out, coverage

    def reconstruct_mu(self, combined, params: LameParameters):
        c = self.config
        system = build_transport(combined, c.k, cond_cap=c.transport_cond_cap)
        result = self.mu_recovery.recover_global(system, params.mu, mode=c.mu_mode,
                                                 compare_modes=c.compare_modes)
        self._write(result.mu, "reconstruct/mu.lfld")
        self._write(result.recovered.as_field(), "reconstruct/mu_mask.lfld")
        report = MuRecoveryReport(
            mode=c.mu_mode, recovered_fraction=result.recovered.interior_fraction,
            unreachable_points=result.unreachable.count, nonpositive_points=result.nonpositive.count,
            mode_disagreement_sup=(float(result.disagreement.values.max())
                                   if result.disagreement is not None else None))
        return result, report

    def reconstruct_lambda(self, combined, mu_result, params: LameParameters):
        c = self.config
        ks = kappa_sigma_from(combined, params.grid.dim, kappa_rel=c.kappa_rel)
        if c.use_true_mu_for_lambda:
            mu = params.mu
        else:
            mu = mu_result.mu
            usable = mu_result.recovered & ~mu_result.nonpositive
            ks = ks.model_copy(update={"mask": ks.mask & usable})
        result = recover_lambda(ks, mu, c.k)
        if c.inpaint_lambda:
            result = lambda_with_inpainting(result)
        self._write(result.lam, "reconstruct/lambda.lfld")
        self._write(result.recovered.as_field(), "reconstruct/lambda_mask.lfld")
        report = LambdaRecoveryReport(recovered_fraction=result.recovered.interior_fraction,
                                      negative_points=result.negative.count,
                                      extrapolated_points=result.extrapolated.count)
        return result, report

    def score(self, mu_result, lambda_result, params: LameParameters):
        mu_metrics = metrics(mu_result.mu, params.mu, mu_result.recovered)
        lambda_metrics = metrics(lambda_result.lam, params.lam, lambda_result.recovered)
        out = self.output_dir / "metrics"
        save_heatmap(error_field(mu_result.mu, params.mu, mu_result.recovered),
                     out / "mu_error.png", mask=mu_result.recovered)
        save_heatmap(error_field(lambda_result.lam, params.lam, lambda_result.recovered),
                     out / "lambda_error.png", mask=lambda_result.recovered)
        self.logger.info(f"μ sup rel error {mu_metrics.sup_rel:.3e}, "
                         f"λ sup rel error {lambda_metrics.sup_rel:.3e}")
        return mu_metrics, lambda_metrics

    def sweep(self, params: LameParameters):
        alpha, beta = BASE_DIRECTIONS[params.grid.dim]["theta1"]
        direction = ComplexDirection(alpha=alpha, beta=beta)
        return tau_sweep(params, direction, self.config.tau_values(), self.config.k)

    async def run(self) -> RunManifest:
        c = self.config
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.logger.info(f"Starting pipeline run in {self.output_dir}")

        params = await self._stage("phantoms", self.build_phantoms)
        traces, design = await self._stage("boundary", self.build_boundary, params)
        fields, forward = await self._stage("forward", self.solve_forward, params, traces)
        data = await self._stage("noise", self.add_noise, fields)
        labels = [t.label or f"u{j}" for j, t in enumerate(traces)]
        bundles = await self._stage("reduce", self.reduce, data, labels)
        eliminated, coverage = await self._stage("diagnose", self.diagnose, bundles)
        mu_result, mu_report = await self._stage(
            "reconstruct-mu", self.reconstruct_mu, eliminated["mu"][1], params)
        lambda_result, lambda_report = await self._stage(
            "reconstruct-lambda", self.reconstruct_lambda, eliminated["lambda"][1], mu_result, params)
        mu_metrics, lambda_metrics = await self._stage(
            "metrics", self.score, mu_result, lambda_result, params)
        sweep = None
        if c.tau_values():
            sweep = await self._stage("tau-sweep", self.sweep, params)

        manifest = RunManifest(
            package_version=__version__, library_versions=library_versions(),
            config=c.model_dump(mode="json"), config_hash=config_hash(c),
            artifacts=dict(sorted(self.artifacts.items())), forward=forward, design=design,
            elimination_coverage=coverage, mu_report=mu_report, lambda_report=lambda_report,
            mu_metrics=mu_metrics, lambda_metrics=lambda_metrics, tau_sweep=sweep)
        await self._stage("persist", self.persist, manifest)
        return manifest.model_copy(update={"timings": dict(self.timings)})

    def persist(self, manifest: RunManifest) -> None:
        write_json(manifest, self.output_dir / self.MANIFEST, exclude={"timings"})
        (self.output_dir / self.TIMINGS).write_text(json.dumps(self.timings, indent=2))


async def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Run one experiment and return its manifest (timings included)."""
    return await ReconstructionPipeline(config).run()
