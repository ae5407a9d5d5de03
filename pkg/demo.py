#!/usr/bin/env python3
"""
Demo script for lamerecon

Usage:
    python demo.py [config_path]

Without a config path a small 2D experiment runs on a 33-point grid with
polynomial boundary data, and the results land in runs/demo.
"""

import sys
import asyncio
import logging
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

from lamerecon.config import load_pipeline_config  # noqa: E402
from lamerecon.errors import LameReconError  # noqa: E402
from lamerecon.models import PipelineConfig  # noqa: E402
from lamerecon.pipeline import run_pipeline  # noqa: E402

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
logger = logging.getLogger(__name__)


def demo_config() -> PipelineConfig:
    return PipelineConfig(
        dim=2, grid_points=33, k=1.0,
        mu_phantom="bump", mu_amplitude=0.3,
        lambda_phantom="sinusoid", lambda_amplitude=0.5,
        boundary_source="family", boundary_family="polynomial", boundary_count=10,
        tau_sweep="1,2,4,8", output_dir="runs/demo",
    )


async def demo_workflow(config_path: str = None):
    """Run one experiment and summarize what came back."""
    config = load_pipeline_config(config_path) if config_path else demo_config()

    print("lamerecon demo")
    print("=" * 50)
    print(f"grid {config.grid_points}^{config.dim}, k={config.k}, "
          f"boundary data: {config.boundary_source.value}")

    manifest = await run_pipeline(config)

    worst = max(r.residual_sup for r in manifest.forward)
    print(f"\nforward solves: {len(manifest.forward)} (worst residual {worst:.1e})")
    for name, value in manifest.elimination_coverage.items():
        print(f"  {name}: {value:.3g}")
    for label, m in (("mu", manifest.mu_metrics), ("lambda", manifest.lambda_metrics)):
        print(f"{label:>6}: sup rel error {m.sup_rel:.3e}, mean rel error {m.mean_rel:.3e}, "
              f"coverage {m.interior_coverage:.1%}")
    if manifest.tau_sweep:
        print(f"CGO decay slope {manifest.tau_sweep.slope:.2f}")
    print(f"\nArtifacts written to {config.output_dir}")


if __name__ == "__main__":
    config_path = sys.argv[1] if len(sys.argv) > 1 else None

    try:
        asyncio.run(demo_workflow(config_path))
    except KeyboardInterrupt:
        print("\nDemo cancelled by user")
    except (LameReconError, FileNotFoundError) as e:
        logger.error(f"Demo error: {str(e)}")
        sys.exit(1)
