import numpy as np
import pytest

from deblurtext.raster import (
    BorderPolicy,
    Kernel,
    Raster,
    convolve2d,
    correlate2d,
    flip180,
    to_grayscale,
)

from conftest import random_raster
from oracles import conv_oracle, corr_oracle

ALL_BORDERS = [BorderPolicy.REPLICATE, BorderPolicy.REFLECT, BorderPolicy.ZERO_PAD]


class TestRasterValidation:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Raster(np.array([[0.0, np.nan]]))

    def test_rejects_inf(self):
        with pytest.raises(ValueError):
            Raster(np.array([[np.inf, 1.0]]))

    def test_rejects_non_2d(self):
        with pytest.raises(ValueError):
            Raster(np.zeros(4))

    def test_immutable(self):
        r = Raster(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            r.data[0, 0] = 1.0

    def test_dims(self):
        r = Raster(np.zeros((3, 5)))
        assert r.height == 3 and r.width == 5


class TestGrayscale:
    def test_equal_channels_pass_through(self):
        c = Raster.full(4, 3, 0.5)
        out = to_grayscale(c, c, c)
        assert np.allclose(out.data, 0.5, rtol=0, atol=1e-15)

    def test_pure_red(self):
        r = Raster.full(4, 3, 1.0)
        z = Raster.full(4, 3, 0.0)
        out = to_grayscale(r, z, z)
        assert np.allclose(out.data, 0.299, rtol=0, atol=0)

    def test_two_pixel_mix(self):
        r = Raster(np.array([[1.0, 0.0]]))
        g = Raster(np.array([[0.0, 1.0]]))
        b = Raster(np.array([[0.0, 0.0]]))
        out = to_grayscale(r, g, b)
        assert out.data[0, 0] == pytest.approx(0.299, abs=1e-15)
        assert out.data[0, 1] == pytest.approx(0.587, abs=1e-15)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            to_grayscale(Raster.full(2, 2, 0.0), Raster.full(3, 2, 0.0), Raster.full(2, 2, 0.0))


class TestConvolve:
    def test_identity_kernel(self, rng):
        img = random_raster(rng)
        k = Kernel(np.array([[1.0]]))
        for border in ALL_BORDERS:
            out = convolve2d(img, k, border)
            assert np.array_equal(out.data, img.data)

    def test_constant_absorbs_border(self, rng):
        img = Raster.full(7, 5, 0.35)
        k = Kernel(rng.uniform(-1, 1, size=(3, 3)))
        out = convolve2d(img, k, BorderPolicy.REPLICATE)
        assert np.allclose(out.data, 0.35 * k.data.sum(), rtol=1e-12)

    def test_center_spike_box_kernel_zeropad(self):
        img = np.zeros((3, 3))
        img[1, 1] = 1.0
        out = convolve2d(Raster(img), Kernel(np.ones((3, 3))), BorderPolicy.ZERO_PAD)
        assert np.array_equal(out.data, np.ones((3, 3)))
        oracle = conv_oracle(img.tolist(), np.ones((3, 3)).tolist(), BorderPolicy.ZERO_PAD)
        assert np.array_equal(out.data, np.array(oracle))

    @pytest.mark.parametrize("border", ALL_BORDERS)
    @pytest.mark.parametrize("kshape", [(1, 1), (1, 3), (3, 1), (3, 3), (2, 2), (1, 2), (4, 3), (5, 5)])
    def test_matches_bruteforce(self, rng, border, kshape):
        img = random_raster(rng, width=9, height=7)
        k = Kernel(rng.uniform(-1, 1, size=kshape))
        out = convolve2d(img, k, border)
        expected = conv_oracle(img.data.tolist(), k.data.tolist(), border)
        assert np.array_equal(out.data, np.array(expected))

    def test_output_dims_match_input(self, rng):
        img = random_raster(rng, width=10, height=6)
        k = Kernel(rng.uniform(-1, 1, size=(5, 3)))
        out = convolve2d(img, k)
        assert out.data.shape == img.data.shape

    def test_linearity(self, rng):
        x = random_raster(rng, width=8, height=8)
        y = random_raster(rng, width=8, height=8)
        k = Kernel(rng.uniform(-1, 1, size=(3, 3)))
        a, b = 2.5, -0.75
        lhs = convolve2d(Raster(a * x.data + b * y.data), k)
        rhs = a * convolve2d(x, k).data + b * convolve2d(y, k).data
        assert np.allclose(lhs.data, rhs, rtol=1e-12, atol=1e-12)

    def test_interior_pixels_border_independent(self, rng):
        img = random_raster(rng, width=12, height=10)
        k = Kernel(rng.uniform(-1, 1, size=(3, 3)))
        outs = [convolve2d(img, k, border).data for border in ALL_BORDERS]
        interior = (slice(1, -1), slice(1, -1))
        assert np.array_equal(outs[0][interior], outs[1][interior])
        assert np.array_equal(outs[0][interior], outs[2][interior])

    def test_reflect_rejects_oversized_kernel(self):
        img = Raster.full(2, 2, 1.0)
        k = Kernel(np.ones((5, 5)) / 25.0)
        with pytest.raises(ValueError):
            convolve2d(img, k, BorderPolicy.REFLECT)
        # replicate has no such limit
        convolve2d(img, k, BorderPolicy.REPLICATE)


class TestCorrelate:
    def test_symmetric_kernel_equals_convolution(self, rng):
        img = random_raster(rng)
        k = Kernel(np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]]))
        assert np.array_equal(convolve2d(img, k).data, correlate2d(img, k).data)

    def test_flip_relation_even_kernel(self, rng):
        img = random_raster(rng)
        assert np.array_equal(
            correlate2d(img, Kernel(np.array([[1.0, 0.0]]))).data,
            convolve2d(img, Kernel(np.array([[0.0, 1.0]]))).data,
        )

    @pytest.mark.parametrize("border", ALL_BORDERS)
    @pytest.mark.parametrize("kshape", [(1, 2), (2, 3), (3, 3), (4, 4)])
    def test_flip_identity_all_borders(self, rng, border, kshape):
        img = random_raster(rng, width=8, height=6)
        k = Kernel(rng.uniform(-1, 1, size=kshape))
        assert np.array_equal(
            convolve2d(img, flip180(k), border).data, correlate2d(img, k, border).data
        )

    def test_forward_difference_replicate(self):
        img = Raster(np.array([[1.0, 2.0, 3.0]]))
        k = Kernel(np.array([[1.0, -1.0]]))
        out = correlate2d(img, k, BorderPolicy.REPLICATE)
        oracle = corr_oracle([[1.0, 2.0, 3.0]], [[1.0, -1.0]], BorderPolicy.REPLICATE)
        assert np.array_equal(out.data, np.array(oracle))
        # conv with the flipped kernel [-1, 1], center at index 1:
        # out[c] = img[c] - img[c+1] under a replicated right edge
        assert out.data.tolist() == [[-1.0, -1.0, 0.0]]
