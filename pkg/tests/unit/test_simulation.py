"""Tests for scene generation and reduced-resolution simulation."""

import numpy as np
import pytest

from lformer.core import ConfigurationError, DimensionError
from lformer.data.simulation import (
    bicubic_matrix,
    blur,
    cubic_weight,
    degrade_ms,
    gaussian_taps,
    gen_scene,
    pan_from_gt,
    upsample_bicubic,
)


class TestScene:
    """Test cases for synthetic scenes."""

    def test_range_and_shape(self):
        """Test the value range and layout of a scene."""
        scene = gen_scene(3, 32, 24, 4)

        assert scene.shape == (32, 24, 4)
        assert scene.min() >= 0.0
        assert scene.max() <= 1.0

    def test_seed_determinism(self):
        """Test that equal seeds give identical scenes and different seeds differ."""
        np.testing.assert_array_equal(gen_scene(1, 16, 16, 3), gen_scene(1, 16, 16, 3))
        assert not np.array_equal(gen_scene(1, 16, 16, 3), gen_scene(2, 16, 16, 3))

    def test_bands_are_correlated(self):
        """Test that neighbouring bands share structure."""
        scene = gen_scene(5, 64, 64, 4)
        corr = np.corrcoef(scene[..., 0].ravel(), scene[..., 1].ravel())[0, 1]

        assert corr > 0.5

    @pytest.mark.parametrize("height,width,bands", [(8, 16, 4), (16, 15, 4), (16, 16, 0)])
    def test_invalid_sizes(self, height, width, bands):
        """Test that tiny scenes and empty spectra are rejected."""
        with pytest.raises(ConfigurationError):
            gen_scene(0, height, width, bands)


class TestPan:
    """Test cases for the PAN response."""

    def test_uniform_weights(self):
        """Test that the default response is the band mean."""
        gt = np.random.default_rng(0).random((4, 4, 3))

        np.testing.assert_allclose(pan_from_gt(gt), gt.mean(axis=2, keepdims=True))

    def test_custom_weights(self):
        """Test a custom spectral response."""
        gt = np.ones((2, 2, 2))
        gt[..., 1] = 3.0

        np.testing.assert_allclose(pan_from_gt(gt, [0.25, 0.75]), 2.5)

    @pytest.mark.parametrize("weights", [[0.5, 0.6], [1.5, -0.5], [1.0]])
    def test_invalid_weights(self, weights):
        """Test that weights must be nonnegative, sum to one and match the bands."""
        with pytest.raises(ConfigurationError):
            pan_from_gt(np.ones((2, 2, 2)), weights)


class TestDegradation:
    """Test cases for blurring and decimation."""

    def test_taps(self):
        """Test the normalized Gaussian of radius 2r."""
        taps = gaussian_taps(4)

        assert taps.shape == (17,)
        assert taps.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(taps, taps[::-1])

    def test_blur_keeps_constants(self):
        """Test that replicated borders keep a constant image constant."""
        np.testing.assert_allclose(blur(np.full((8, 8, 2), 0.3), 2), 0.3)

    def test_degrade_shape(self):
        """Test the decimated size."""
        assert degrade_ms(np.zeros((16, 12, 3)), 4).shape == (4, 3, 3)

    def test_degrade_requires_divisible_size(self):
        """Test that the size must be a multiple of the ratio."""
        with pytest.raises(DimensionError):
            degrade_ms(np.zeros((10, 12, 1)), 4)
        with pytest.raises(ConfigurationError):
            degrade_ms(np.zeros((4, 4, 1)), 0)


class TestUpsampling:
    """Test cases for bicubic interpolation."""

    def test_kernel_values(self):
        """Test the interpolation kernel at its nodes."""
        np.testing.assert_allclose(cubic_weight(np.array([0.0, 1.0, 2.0, 2.5])), [1.0, 0.0, 0.0, 0.0])
        assert cubic_weight(np.array(0.5)) == pytest.approx(0.5625)

    def test_rows_sum_to_one(self):
        """Test that every output sample is an affine combination of inputs."""
        np.testing.assert_allclose(bicubic_matrix(5, 4).sum(axis=1), 1.0)

    def test_grid_points_are_exact(self):
        """Test that upsampling reproduces the input on the coarse grid."""
        ms = np.random.default_rng(1).random((6, 5, 3))
        up = upsample_bicubic(ms, 4)

        assert up.shape == (24, 20, 3)
        np.testing.assert_allclose(up[::4, ::4], ms, atol=1e-12)

    def test_linear_ramp_is_preserved(self):
        """Test that interior samples of a linear ramp stay on the ramp."""
        ramp = np.tile(np.arange(8.0)[:, None, None], (1, 8, 1))
        up = upsample_bicubic(ramp, 2)

        np.testing.assert_allclose(up[4:12, 3, 0], np.arange(4, 12) / 2.0, atol=1e-12)


class TestWorkedExamples:
    """Test cases for trivial simulation inputs."""

    def test_single_band_pan_is_the_band(self):
        """Test that a unit response on one band reproduces it."""
        gt = np.random.default_rng(2).random((4, 4, 1))

        np.testing.assert_array_equal(pan_from_gt(gt, [1.0]), gt)

    def test_identical_bands(self):
        """Test that uniform weights over identical bands return that band."""
        band = np.random.default_rng(3).random((4, 4, 1))

        np.testing.assert_allclose(pan_from_gt(np.repeat(band, 3, axis=2)), band)

    def test_blur_keeps_interior_mean(self):
        """Test that blurring a centered blob preserves its mean."""
        yy, xx = np.mgrid[:32, :32]
        blob = np.exp(-((yy - 15.5) ** 2 + (xx - 15.5) ** 2) / 20.0)[:, :, None]

        assert blur(blob, 2).mean() == pytest.approx(blob.mean(), abs=1e-3)
