"""Directory layouts for bundles, boundary traces and JSON reports."""

import logging
from pathlib import Path
from typing import List, Union

from pydantic import BaseModel

from ..errors import FieldFormatError
from ..models import BoundaryData, Rank, ReductionBundle, Variant
from .lfld import read_field, write_field

logger = logging.getLogger(__name__)

BUNDLE_META = "bundle.json"
TRACES_META = "traces.json"


class BundleMeta(BaseModel):
    variant: Variant
    dim: int
    count: int
    source_labels: List[str]


class TracesMeta(BaseModel):
    count: int
    labels: List[str]


def write_json(model: BaseModel, path: Union[str, Path], **dump_kwargs) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2, **dump_kwargs))
    return path


def save_bundle(bundle: ReductionBundle, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for j in range(bundle.count):
        write_field(bundle.sharp[j], directory / f"sharp_{j:03d}.lfld")
        write_field(bundle.flat[j], directory / f"flat_{j:03d}.lfld")
        write_field(bundle.star[j], directory / f"star_{j:03d}.lfld")
    meta = BundleMeta(variant=bundle.variant, dim=bundle.dim, count=bundle.count,
                      source_labels=list(bundle.source_labels))
    write_json(meta, directory / BUNDLE_META)
    logger.info(f"Saved {bundle.variant.value} bundle with {bundle.count} solutions to {directory}")
    return directory


def load_bundle(directory: Union[str, Path]) -> ReductionBundle:
    directory = Path(directory)
    meta_path = directory / BUNDLE_META
    if not meta_path.exists():
        raise FileNotFoundError(f"No {BUNDLE_META} in {directory}")
    meta = BundleMeta.model_validate_json(meta_path.read_text())
    try:
        sharp = [read_field(directory / f"sharp_{j:03d}.lfld", Rank.VECTOR) for j in range(meta.count)]
        flat = [read_field(directory / f"flat_{j:03d}.lfld", Rank.VECTOR) for j in range(meta.count)]
        star = [read_field(directory / f"star_{j:03d}.lfld", Rank.SCALAR) for j in range(meta.count)]
    except FileNotFoundError as e:
        raise FieldFormatError(f"Incomplete bundle in {directory}: {e}") from e
    return ReductionBundle(variant=meta.variant, dim=meta.dim, sharp=sharp, flat=flat, star=star,
                           source_labels=meta.source_labels)


def save_traces(traces: List[BoundaryData], directory: Union[str, Path]) -> List[Path]:
    """Boundary traces as full-grid LFLD files with zero interior."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [write_field(t.to_field(), directory / f"trace_{j:03d}.lfld")
             for j, t in enumerate(traces)]
    write_json(TracesMeta(count=len(traces), labels=[t.label for t in traces]),
               directory / TRACES_META)
    return paths


def load_traces(directory: Union[str, Path]) -> List[BoundaryData]:
    directory = Path(directory)
    meta_path = directory / TRACES_META
    if meta_path.exists():
        meta = TracesMeta.model_validate_json(meta_path.read_text())
        paths = [directory / f"trace_{j:03d}.lfld" for j in range(meta.count)]
        labels = meta.labels
    else:
        paths = sorted(directory.glob("*.lfld"))
        labels = [p.stem for p in paths]
    if not paths:
        raise FileNotFoundError(f"No boundary traces in {directory}")
    return [BoundaryData.from_field(read_field(p, Rank.VECTOR), label=label)
            for p, label in zip(paths, labels)]
