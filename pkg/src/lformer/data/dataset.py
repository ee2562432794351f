"""On-disk datasets of simulated pan-sharpening samples.

Layout:

    <root>/manifest.txt
    <root>/<split>/<id>/{gt,pan,ms,ms_up}.lftk

The `test_full` split stores no `gt.lftk`; its PAN has twice the reduced-resolution size.
"""

import logging
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Annotated

import numpy as np
from pydantic import BaseModel, Field

from lformer.core.errors import ConfigurationError, DataError
from lformer.core.tensor import Tensor
from lformer.utils.keyvalue import format_keyvalue, parse_keyvalue, split_list

from .container import load_tensor, save_tensor
from .simulation import degrade_ms, gen_scene, pan_from_gt, upsample_bicubic

logger = logging.getLogger(__name__)

SPLITS: tuple[str, ...] = ("train", "val", "test", "test_full")
FULL_RESOLUTION_SPLIT = "test_full"
MANIFEST_NAME = "manifest.txt"
SAMPLE_FILES: tuple[str, ...] = ("pan", "ms", "ms_up")


@dataclass
class Sample:
    """One aligned sample. `gt` is None on the full-resolution split."""

    id: str
    pan: Tensor
    ms: Tensor
    ms_up: Tensor
    gt: Tensor | None = None

    @property
    def has_gt(self) -> bool:
        return self.gt is not None

    def astype(self, dtype: str) -> "Sample":
        def cast(t: Tensor | None) -> Tensor | None:
            return None if t is None else Tensor(t.data, dtype=dtype)

        return Sample(self.id, cast(self.pan), cast(self.ms), cast(self.ms_up), cast(self.gt))  # type: ignore[arg-type]


class DatasetManifest(BaseModel):
    """Description of a generated dataset"""

    seed: Annotated[int, Field(description="Generation seed")]
    ratio: Annotated[int, Field(description="MS to PAN resolution ratio")]
    bands: Annotated[int, Field(description="Spectral band count")]
    height: Annotated[int, Field(description="Reduced-resolution PAN/GT height")]
    width: Annotated[int, Field(description="Reduced-resolution PAN/GT width")]
    pan_weights: Annotated[list[float], Field(description="Band weights of the PAN response")]
    splits: Annotated[dict[str, list[str]], Field(default={}, description="Sample ids per split")]

    @property
    def counts(self) -> dict[str, int]:
        return {split: len(ids) for split, ids in self.splits.items()}

    def ids(self, split: str) -> list[str]:
        if split not in self.splits:
            raise DataError(f"split '{split}' is not in the dataset (have: {', '.join(self.splits)})")
        return self.splits[split]

    def to_text(self) -> str:
        values: dict[str, object] = {
            "seed": self.seed,
            "ratio": self.ratio,
            "bands": self.bands,
            "height": self.height,
            "width": self.width,
            "pan_weights": self.pan_weights,
        }
        for split, ids in self.splits.items():
            values[f"count.{split}"] = len(ids)
            values[f"split.{split}"] = ids
        return format_keyvalue(values)

    @classmethod
    def from_text(cls, text: str) -> "DatasetManifest":
        try:
            raw = parse_keyvalue(text)
            splits = {key.removeprefix("split."): split_list(v) for key, v in raw.items() if key.startswith("split.")}
            for split, ids in splits.items():
                if int(raw.get(f"count.{split}", len(ids))) != len(ids):
                    raise DataError(f"manifest count for '{split}' disagrees with its id list")
                if len(set(ids)) != len(ids):
                    raise DataError(f"duplicate sample ids in split '{split}'")
            return cls(
                seed=int(raw["seed"]),
                ratio=int(raw["ratio"]),
                bands=int(raw["bands"]),
                height=int(raw["height"]),
                width=int(raw["width"]),
                pan_weights=[float(w) for w in split_list(raw["pan_weights"])],
                splits=splits,
            )
        except (KeyError, ValueError, ConfigurationError) as e:
            raise DataError(f"malformed manifest: {e}") from e


def sample_seed(seed: int, split: str, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, SPLITS.index(split), index])


def simulate_sample(
    seed: np.random.SeedSequence, height: int, width: int, bands: int, ratio: int, weights: np.ndarray
) -> dict[str, np.ndarray]:
    """Generate a scene and derive PAN, MS and upsampled MS from it"""
    scene_seed = int(seed.generate_state(1)[0])
    gt = gen_scene(scene_seed, height, width, bands)
    ms = degrade_ms(gt, ratio)
    # the bicubic kernel overshoots near edges; stored images stay in [0, 1]
    ms_up = np.clip(upsample_bicubic(ms, ratio), 0.0, 1.0)
    arrays = {"gt": gt, "pan": pan_from_gt(gt, weights), "ms": ms, "ms_up": ms_up}
    return {name: a.astype(np.float32) for name, a in arrays.items()}


def build_dataset(
    root: str | Path,
    seed: int = 0,
    n_train: int = 64,
    n_val: int = 8,
    n_test: int = 8,
    height: int = 64,
    width: int = 64,
    bands: int = 4,
    ratio: int = 4,
    n_full: int = 0,
    pan_weights: list[float] | None = None,
    workers: int = 1,
) -> DatasetManifest:
    """Generate every split and write the files plus `manifest.txt` under `root`.

    Each sample draws from its own seed derived from (seed, split, index), so the output does
    not depend on `workers` or on generation order.

    Args:
        root: Output directory; must be missing or empty.
        seed: Dataset seed.
        n_train: Training samples.
        n_val: Validation samples.
        n_test: Reduced-resolution test samples.
        height: PAN/GT height at reduced resolution.
        width: PAN/GT width at reduced resolution.
        bands: Spectral bands.
        ratio: Resolution ratio; must divide height and width.
        n_full: Full-resolution test samples (PAN at 2H x 2W, no GT).
        pan_weights: PAN spectral response; uniform when omitted.
        workers: Threads used for generation.

    Returns:
        The manifest that was written.

    Raises:
        DataError: If `root` exists and is not empty.
    """
    root = Path(root)
    if root.exists() and any(root.iterdir()):
        raise DataError(f"output directory {root} is not empty")
    if height % ratio or width % ratio:
        raise ConfigurationError(f"size {height}x{width} is not divisible by ratio {ratio}")
    weights = np.full(bands, 1.0 / bands) if pan_weights is None else np.asarray(pan_weights, dtype=np.float64)

    counts = {"train": n_train, "val": n_val, "test": n_test, FULL_RESOLUTION_SPLIT: n_full}
    jobs = []
    splits: dict[str, list[str]] = {}
    for split, count in counts.items():
        if count < 0:
            raise ConfigurationError(f"sample count for {split} must be >= 0")
        if count == 0 and split == FULL_RESOLUTION_SPLIT:
            continue
        splits[split] = [f"{split}_{i:05d}" for i in range(count)]
        jobs.extend((split, i, sample_id) for i, sample_id in enumerate(splits[split]))

    def generate(job: tuple[str, int, str]) -> None:
        split, index, sample_id = job
        scale = 2 if split == FULL_RESOLUTION_SPLIT else 1
        arrays = simulate_sample(
            sample_seed(seed, split, index), scale * height, scale * width, bands, ratio, weights
        )
        if split == FULL_RESOLUTION_SPLIT:
            del arrays["gt"]
        for name, array in arrays.items():
            save_tensor(root / split / sample_id / f"{name}.lftk", array)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(generate, jobs))
    else:
        for job in jobs:
            generate(job)

    manifest = DatasetManifest(
        seed=seed, ratio=ratio, bands=bands, height=height, width=width, pan_weights=weights.tolist(), splits=splits
    )
    root.mkdir(parents=True, exist_ok=True)
    (root / MANIFEST_NAME).write_text(manifest.to_text(), encoding="utf-8")
    logger.info(f"Wrote dataset to {root}: {manifest.counts}")
    return manifest


def load_manifest(root: str | Path, check_files: bool = True) -> DatasetManifest:
    """Read `manifest.txt`; with `check_files` every listed sample must also be on disk"""
    path = Path(root) / MANIFEST_NAME
    if not path.is_file():
        raise DataError(f"no {MANIFEST_NAME} in {root}")
    manifest = DatasetManifest.from_text(path.read_text(encoding="utf-8"))
    if check_files:
        missing = missing_sample_files(root, manifest)
        if missing:
            raise DataError(f"{len(missing)} sample file(s) listed in {MANIFEST_NAME} are missing, first: {missing[0]}")
    return manifest


def missing_sample_files(root: str | Path, manifest: DatasetManifest) -> list[Path]:
    missing = []
    for split, ids in manifest.splits.items():
        names = SAMPLE_FILES if split == FULL_RESOLUTION_SPLIT else (*SAMPLE_FILES, "gt")
        for sample_id in ids:
            directory = Path(root) / split / sample_id
            missing.extend(p for p in (directory / f"{name}.lftk" for name in names) if not p.is_file())
    return missing


def load_sample(root: str | Path, split: str, sample_id: str) -> Sample:
    """Read one sample; `gt` is None when the sample has no ground truth"""
    directory = Path(root) / split / sample_id
    if not directory.is_dir():
        raise DataError(f"sample '{sample_id}' not found in split '{split}'")
    gt_path = directory / "gt.lftk"
    return Sample(
        id=sample_id,
        pan=load_tensor(directory / "pan.lftk"),
        ms=load_tensor(directory / "ms.lftk"),
        ms_up=load_tensor(directory / "ms_up.lftk"),
        gt=load_tensor(gt_path) if gt_path.is_file() else None,
    )


def iter_samples(root: str | Path, split: str) -> Iterator[Sample]:
    manifest = load_manifest(root)
    for sample_id in manifest.ids(split):
        yield load_sample(root, split, sample_id)


def find_sample(root: str | Path, sample_id: str) -> Sample:
    """Locate a sample by id in whichever split holds it"""
    manifest = load_manifest(root)
    for split, ids in manifest.splits.items():
        if sample_id in ids:
            return load_sample(root, split, sample_id)
    raise DataError(f"sample '{sample_id}' not found in {root}")
