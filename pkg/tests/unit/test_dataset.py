"""Tests for on-disk datasets and image export."""

import numpy as np
import pytest

from lformer.core import ConfigurationError, DataError, DimensionError, Tensor
from lformer.data.dataset import (
    DatasetManifest,
    build_dataset,
    find_sample,
    iter_samples,
    load_manifest,
    load_sample,
    sample_seed,
    simulate_sample,
)
from lformer.data.export import minmax_normalize, read_ppm, to_rgb8, write_ppm

SMALL_DATASET = {
    "seed": 3,
    "n_train": 3,
    "n_val": 1,
    "n_test": 2,
    "height": 16,
    "width": 16,
    "bands": 2,
    "ratio": 2,
    "n_full": 1,
}


@pytest.fixture
def dataset(tmp_path):
    """Small dataset with every split."""
    root = tmp_path / "data"
    manifest = build_dataset(root, **SMALL_DATASET)
    return root, manifest


class TestBuildDataset:
    """Test cases for dataset generation."""

    def test_manifest(self, dataset):
        """Test split ids, counts and the manifest written to disk."""
        root, manifest = dataset

        assert manifest.counts == {"train": 3, "val": 1, "test": 2, "test_full": 1}
        assert manifest.ids("test") == ["test_00000", "test_00001"]
        assert load_manifest(root) == manifest
        assert manifest.pan_weights == [0.5, 0.5]

    def test_sample_shapes(self, dataset):
        """Test the arrays of a reduced-resolution sample."""
        root, _ = dataset
        sample = load_sample(root, "train", "train_00001")

        assert sample.has_gt
        assert sample.gt.shape == (16, 16, 2)
        assert sample.pan.shape == (16, 16, 1)
        assert sample.ms.shape == (8, 8, 2)
        assert sample.ms_up.shape == (16, 16, 2)
        assert sample.pan.dtype == np.float32
        np.testing.assert_allclose(sample.pan.data, sample.gt.data.mean(axis=2, keepdims=True), atol=1e-6)

    def test_full_resolution_split(self, dataset):
        """Test that full-resolution samples are twice as large and have no ground truth."""
        root, _ = dataset
        sample = find_sample(root, "test_full_00000")

        assert not sample.has_gt
        assert sample.pan.shape == (32, 32, 1)
        assert sample.ms.shape == (16, 16, 2)

    def test_generation_is_reproducible(self, dataset, tmp_path):
        """Test that the same seed gives bit-identical files regardless of worker count."""
        root, _ = dataset
        other = tmp_path / "again"
        build_dataset(other, **SMALL_DATASET, workers=3)

        for path in sorted(root.rglob("*.lftk")):
            assert path.read_bytes() == (other / path.relative_to(root)).read_bytes()

    def test_arrays_stay_in_unit_range(self):
        """Test that every stored array, including the bicubic upsampling, lies in [0, 1]."""
        weights = np.full(4, 0.25)
        for index in range(200):
            arrays = simulate_sample(sample_seed(0, "train", index), 32, 32, 4, 4, weights)
            for name, array in arrays.items():
                assert 0.0 <= array.min() and array.max() <= 1.0, f"{name} of sample {index} leaves [0, 1]"

    def test_sample_seeds_are_independent(self):
        """Test that split and index both enter the per-sample seed."""
        states = {
            tuple(sample_seed(0, split, index).generate_state(2))
            for split in ("train", "val")
            for index in range(3)
        }

        assert len(states) == 6

    def test_non_empty_root(self, dataset):
        """Test that an existing dataset is never overwritten."""
        root, _ = dataset
        with pytest.raises(DataError):
            build_dataset(root, n_train=1, n_val=0, n_test=0, height=16, width=16)

    def test_size_not_divisible(self, tmp_path):
        """Test that the size must be divisible by the ratio."""
        with pytest.raises(ConfigurationError):
            build_dataset(tmp_path / "d", height=18, width=16, ratio=4)


class TestLoading:
    """Test cases for reading datasets back."""

    def test_iter_samples(self, dataset):
        """Test iteration in manifest order."""
        root, _ = dataset

        assert [s.id for s in iter_samples(root, "train")] == ["train_00000", "train_00001", "train_00002"]

    def test_missing_split_and_sample(self, dataset):
        """Test the data errors for unknown splits and ids."""
        root, manifest = dataset
        with pytest.raises(DataError):
            manifest.ids("holdout")
        with pytest.raises(DataError):
            find_sample(root, "train_00099")
        with pytest.raises(DataError):
            load_sample(root, "val", "val_00005")

    def test_missing_manifest(self, tmp_path):
        """Test that a directory without a manifest is not a dataset."""
        with pytest.raises(DataError):
            load_manifest(tmp_path)

    def test_manifest_with_missing_files(self, dataset):
        """Test that a manifest listing a deleted sample file is a data error."""
        root, _ = dataset
        (root / "train" / "train_00001" / "ms_up.lftk").unlink()
        with pytest.raises(DataError, match="missing"):
            load_manifest(root)
        with pytest.raises(DataError):
            list(iter_samples(root, "test"))

        assert load_manifest(root, check_files=False).counts["train"] == 3

    def test_missing_ground_truth(self, dataset):
        """Test that reduced-resolution samples must keep their ground truth."""
        root, _ = dataset
        (root / "val" / "val_00000" / "gt.lftk").unlink()
        with pytest.raises(DataError):
            load_manifest(root)

    def test_astype(self, dataset):
        """Test casting all arrays of a sample."""
        root, _ = dataset
        sample = load_sample(root, "test_full", "test_full_00000").astype("float64")

        assert sample.ms_up.dtype == np.float64
        assert sample.gt is None


class TestManifestText:
    """Test cases for the manifest text format."""

    @pytest.fixture
    def manifest(self):
        """Manifest with two splits."""
        return DatasetManifest(
            seed=1,
            ratio=4,
            bands=4,
            height=64,
            width=64,
            pan_weights=[0.25] * 4,
            splits={"train": ["train_00000", "train_00001"], "test": ["test_00000"]},
        )

    def test_round_trip(self, manifest):
        """Test that the text form restores the manifest."""
        text = manifest.to_text()

        assert "count.train=2" in text
        assert DatasetManifest.from_text(text) == manifest

    def test_count_mismatch(self, manifest):
        """Test that counts must agree with the id lists."""
        with pytest.raises(DataError, match="disagrees"):
            DatasetManifest.from_text(manifest.to_text().replace("count.train=2", "count.train=3"))

    def test_missing_key(self, manifest):
        """Test that a manifest without a seed is malformed."""
        text = "\n".join(line for line in manifest.to_text().splitlines() if not line.startswith("seed="))
        with pytest.raises(DataError, match="malformed"):
            DatasetManifest.from_text(text)


class TestExport:
    """Test cases for PPM export."""

    def test_round_trip(self, tmp_path):
        """Test that an RGB image survives quantization to 8 bits."""
        image = np.random.default_rng(0).random((5, 7, 3))
        pixels = read_ppm(write_ppm(tmp_path / "img.ppm", image))

        assert pixels.shape == (5, 7, 3)
        np.testing.assert_array_equal(pixels, to_rgb8(image))

    def test_grayscale_is_replicated(self, tmp_path):
        """Test that single-band images become gray RGB."""
        pixels = read_ppm(write_ppm(tmp_path / "gray.ppm", Tensor(np.full((2, 3), 0.5))))

        assert np.all(pixels == 128)

    def test_normalize(self, tmp_path):
        """Test min-max scaling and its constant-image case."""
        np.testing.assert_allclose(minmax_normalize(np.array([2.0, 4.0, 3.0])), [0.0, 1.0, 0.5])
        np.testing.assert_array_equal(minmax_normalize(np.full(3, 7.0)), 0.0)
        pixels = read_ppm(write_ppm(tmp_path / "n.ppm", np.array([[10.0, 20.0]]), normalize=True))
        assert pixels[0, 0, 0] == 0 and pixels[0, 1, 0] == 255

    def test_band_count(self):
        """Test that only gray or RGB images are exported."""
        with pytest.raises(DimensionError):
            to_rgb8(np.zeros((2, 2, 4)))
