"""Tests for quality indexes and metric reports."""

import math

import numpy as np
import pandas as pd
import pytest

from lformer.core import DimensionError, NumericError
from lformer.quality.metrics import (
    cd_conjugate,
    cd_multiply,
    d_lambda,
    d_s,
    ergas,
    hqnr,
    psnr,
    q2n,
    q2n_label,
    q_index,
    sam,
    ssim_index,
    structure_constants,
)
from lformer.quality.report import FULL_COLUMNS, MetricReport, assess_full, assess_reduced, reduced_columns

from .helpers import (
    hamilton_product,
    naive_d_lambda,
    naive_d_s,
    naive_ergas,
    naive_psnr,
    naive_q,
    naive_sam,
)

ORACLE_TOLERANCE = 1e-6


@pytest.fixture
def rng():
    """Seeded generator for reproducible inputs."""
    return np.random.default_rng(123)


def noisy_pair(rng, shape, noise=0.1):
    x = rng.uniform(0.05, 1.0, shape)
    return x, np.clip(x + rng.normal(0, noise, shape), 0.01, 1.0)


class TestReferenceIndexes:
    """Test cases for full-reference indexes against naive loops."""

    def test_sam_ergas_psnr(self, rng):
        """Test SAM, ERGAS and PSNR on random pairs."""
        for _ in range(20):
            x, y = noisy_pair(rng, (6, 7, 4))

            assert sam(x, y) == pytest.approx(naive_sam(x, y), abs=ORACLE_TOLERANCE)
            assert ergas(x, y, 4) == pytest.approx(naive_ergas(x, y, 4), abs=ORACLE_TOLERANCE)
            assert psnr(x, y) == pytest.approx(naive_psnr(x, y), abs=ORACLE_TOLERANCE)

    @pytest.mark.parametrize("bands", [1, 2, 3, 4])
    def test_q2n(self, rng, bands):
        """Test the windowed hypercomplex index for every supported band count."""
        for _ in range(20):
            x, y = noisy_pair(rng, (7, 6, bands), noise=0.2)

            assert q2n(x, y, window=4) == pytest.approx(naive_q(x, y, 4), abs=ORACLE_TOLERANCE)

    def test_q_index_single_band(self, rng):
        """Test the scalar index on two-dimensional input."""
        x, y = noisy_pair(rng, (9, 9))

        assert q_index(x, y, window=3) == pytest.approx(naive_q(x, y, 3), abs=ORACLE_TOLERANCE)
        assert q_index(x[..., None], y[..., None], window=3) == pytest.approx(q_index(x, y, window=3))

    def test_identity(self, rng):
        """Test the ideal values of every index for identical images."""
        x = rng.uniform(0.1, 1.0, (12, 12, 4))

        assert sam(x, x) == pytest.approx(0.0, abs=1e-5)
        assert ergas(x, x, 4) == 0.0
        assert psnr(x, x) == math.inf
        assert ssim_index(x, x) == pytest.approx(1.0)
        assert q2n(x, x, window=8) == pytest.approx(1.0)

    def test_zero_spectrum_counts_as_zero_angle(self):
        """Test that pixels with a zero spectrum contribute no angle."""
        x = np.ones((1, 2, 3))
        y = np.ones((1, 2, 3))
        y[0, 0] = 0.0

        assert sam(x, y) == pytest.approx(0.0)

    def test_ergas_zero_mean_band(self):
        """Test that a zero-mean reference band is a numeric error."""
        with pytest.raises(NumericError):
            ergas(np.ones((2, 2, 2)), np.zeros((2, 2, 2)), 4)

    def test_degenerate_windows(self):
        """Test the constant-image conventions of Q."""
        flat = np.full((5, 5), 0.5)

        assert q_index(flat, flat, window=3) == 1.0
        assert q_index(flat, np.full((5, 5), 0.2), window=3) == 0.0

    def test_window_must_fit(self):
        """Test that an oversized window is rejected."""
        with pytest.raises(DimensionError):
            q_index(np.ones((4, 4)), np.ones((4, 4)), window=5)

    def test_shape_mismatch(self):
        """Test that operands must share a shape."""
        with pytest.raises(DimensionError):
            psnr(np.ones((2, 2, 1)), np.ones((2, 2, 2)))

    @pytest.mark.parametrize("bands,label", [(1, "Q"), (2, "Q2"), (3, "Q4"), (4, "Q4"), (8, "Q8")])
    def test_label(self, bands, label):
        """Test the report column name for each band count."""
        assert q2n_label(bands) == label


class TestHypercomplex:
    """Test cases for the Cayley-Dickson algebra."""

    def test_quaternion_product(self, rng):
        """Test that the four-dimensional product is the quaternion product."""
        for _ in range(20):
            p, q = rng.standard_normal(4), rng.standard_normal(4)

            np.testing.assert_allclose(cd_multiply(p, q), hamilton_product(p, q), atol=1e-12)

    def test_octonion_norm_is_multiplicative(self, rng):
        """Test |pq| = |p||q| in eight dimensions."""
        p, q = rng.standard_normal(8), rng.standard_normal(8)

        assert np.linalg.norm(cd_multiply(p, q)) == pytest.approx(np.linalg.norm(p) * np.linalg.norm(q))

    def test_conjugate_product_is_squared_norm(self, rng):
        """Test that z conj(z) is real and equals |z|^2."""
        z = rng.standard_normal(4)

        np.testing.assert_allclose(cd_multiply(z, cd_conjugate(z)), [z @ z, 0, 0, 0], atol=1e-12)

    def test_structure_constants(self, rng):
        """Test that the table reproduces p * conj(q) bilinearly."""
        p, q = rng.standard_normal(4), rng.standard_normal(4)
        table = structure_constants(4)

        np.testing.assert_allclose(np.einsum("kij,i,j->k", table, p, q), cd_multiply(p, cd_conjugate(q)), atol=1e-12)


class TestNoReferenceIndexes:
    """Test cases for the full-resolution distortion indexes."""

    def test_d_lambda(self, rng):
        """Test spectral distortion against loops."""
        for _ in range(5):
            fused = rng.uniform(0.05, 1.0, (8, 8, 3))
            ms = rng.uniform(0.05, 1.0, (4, 4, 3))

            assert d_lambda(fused, ms, window=4) == pytest.approx(naive_d_lambda(fused, ms, 4), abs=ORACLE_TOLERANCE)

    def test_d_s(self, rng):
        """Test spatial distortion against loops."""
        for _ in range(5):
            fused = rng.uniform(0.05, 1.0, (8, 8, 2))
            ms = rng.uniform(0.05, 1.0, (4, 4, 2))
            pan = rng.uniform(0.05, 1.0, (8, 8, 1))
            pan_low = rng.uniform(0.05, 1.0, (4, 4, 1))

            expected = naive_d_s(fused, ms, pan, pan_low, 4)
            assert d_s(fused, ms, pan, pan_low, window=4) == pytest.approx(expected, abs=ORACLE_TOLERANCE)

    def test_d_lambda_needs_two_bands(self):
        """Test that a single band has no spectral distortion to measure."""
        with pytest.raises(DimensionError):
            d_lambda(np.ones((4, 4, 1)), np.ones((2, 2, 1)), window=2)

    def test_non_integer_ratio(self):
        """Test that the resolutions must differ by an integer factor."""
        with pytest.raises(DimensionError):
            d_lambda(np.ones((6, 6, 2)), np.ones((4, 4, 2)), window=2)

    def test_hqnr(self):
        """Test the product of the two complements."""
        assert hqnr(0.1, 0.2) == pytest.approx(0.72)
        assert hqnr(0.0, 0.0) == 1.0


class TestReport:
    """Test cases for per-image reports."""

    def test_assess_reduced_columns(self, rng):
        """Test the reduced-resolution metric set on a near-perfect fusion."""
        gt = rng.uniform(0.1, 1.0, (16, 16, 4))
        values = assess_reduced(gt, gt, ratio=4)

        assert list(values) == reduced_columns(4) == ["SAM", "ERGAS", "PSNR", "SSIM", "Q4"]
        assert values["PSNR"] == math.inf
        assert values["Q4"] == pytest.approx(1.0)

    def test_assess_full_ranges(self, rng):
        """Test that the distortions are in [0, 1] and combine into HQNR."""
        values = assess_full(
            rng.uniform(0.1, 1.0, (16, 16, 4)), rng.uniform(0.1, 1.0, (4, 4, 4)), rng.uniform(0.1, 1.0, (16, 16, 1)), 4
        )

        assert list(values) == FULL_COLUMNS
        assert 0.0 <= values["D_lambda"] <= 1.0
        assert 0.0 <= values["D_s"] <= 1.0
        assert values["HQNR"] == pytest.approx((1 - values["D_lambda"]) * (1 - values["D_s"]))

    def test_frame_and_csv(self, tmp_path):
        """Test the mean and std rows and the written CSV."""
        report = MetricReport("full", FULL_COLUMNS)
        report.add("a", {"D_lambda": 0.1, "D_s": 0.2, "HQNR": 0.72, "extra": 5.0})
        report.add("b", {"D_lambda": 0.3, "D_s": 0.4, "HQNR": 0.42})
        frame = report.to_frame()

        assert list(frame["id"]) == ["a", "b", "mean", "std"]
        assert list(frame.columns) == ["id", *FULL_COLUMNS]
        assert frame.iloc[2]["D_lambda"] == pytest.approx(0.2)
        assert frame.iloc[3]["D_s"] == pytest.approx(0.1)

        written = pd.read_csv(report.write_csv(tmp_path / "reports" / "full.csv"))
        assert written.shape == (4, 4)

    def test_infinite_values(self):
        """Test that an infinite PSNR keeps the mean infinite and the std undefined."""
        report = MetricReport("reduced", ["PSNR"])
        report.add("a", {"PSNR": math.inf})
        report.add("b", {"PSNR": 30.0})

        assert report.mean()["PSNR"] == math.inf
        assert math.isnan(report.std()["PSNR"])


class TestWorkedExamples:
    """Test cases for hand-evaluated metric values."""

    def test_spectral_angles(self):
        """Test 45 and 90 degree angles between single pixels."""
        assert sam(np.array([[[1.0, 0.0]]]), np.array([[[1.0, 1.0]]])) == pytest.approx(45.0)
        assert sam(np.array([[[1.0, 0.0]]]), np.array([[[0.0, 1.0]]])) == pytest.approx(90.0)

    def test_ergas_by_hand(self):
        """Test a band whose RMSE equals its mean, and scale invariance."""
        reference = np.ones((2, 2, 1))
        fused = reference + np.array([[1.0, -1.0], [-1.0, 1.0]])[:, :, None]

        assert ergas(fused, reference, ratio=4) == pytest.approx(25.0)
        assert ergas(2 * fused, 2 * reference, ratio=4) == pytest.approx(25.0)

    def test_psnr_by_hand(self):
        """Test 20 dB at a mean squared error of 0.01."""
        assert psnr(np.zeros((3, 3, 2)), np.full((3, 3, 2), 0.1)) == pytest.approx(20.0)
        assert psnr(np.ones((2, 2, 1)), np.ones((2, 2, 1))) == math.inf

    def test_q_of_negated_zero_mean_image(self):
        """Test that a zero-mean image against its negation gives -1."""
        x = np.tile(np.array([[1.0, -1.0], [-1.0, 1.0]]), (2, 2))

        assert q_index(x, -x, window=4) == pytest.approx(-1.0)

    def test_q_penalizes_offset(self, rng):
        """Test that a constant offset lowers Q below one."""
        x = rng.random((8, 8))

        assert q_index(x, x + 0.5, window=4) < 1.0
