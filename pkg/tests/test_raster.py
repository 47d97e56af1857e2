import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tissueseg import (
    DegenerateInputError,
    GrayImage,
    LabelMap,
    MembershipImage,
    PGMFormatError,
    compute_histogram,
    load_label_pgm,
    load_pgm,
    save_label_pgm,
    save_pgm,
)

images = arrays(
    np.uint8,
    st.tuples(st.integers(1, 12), st.integers(1, 12)),
    elements=st.integers(0, 255),
)


class TestLoadPGM:
    def test_binary(self):
        img = load_pgm(b"P5 2 2 255\n" + bytes([0, 7, 255, 128]))
        assert img.shape == (2, 2)
        assert img.pixels.ravel().tolist() == [0, 7, 255, 128]
        assert img.levels == 256

    def test_ascii(self):
        img = load_pgm(b"P2 1 1 255\n42")
        assert img.shape == (1, 1)
        assert img.pixels[0, 0] == 42

    def test_comments_and_whitespace(self):
        data = b"P2\n# a comment\n 3\t# another\n1\n\n255\n1 2\n# mid-raster\n3\n"
        assert load_pgm(data).pixels.tolist() == [[1, 2, 3]]

    def test_binary_comment_in_header(self):
        data = b"P5\n# made by hand\n2 1\n255\n" + bytes([9, 10])
        assert load_pgm(data).pixels.tolist() == [[9, 10]]

    def test_small_maxval_passes_values_through(self):
        img = load_pgm(b"P2 2 1 15\n3 15")
        assert img.levels == 256
        assert img.pixels.tolist() == [[3, 15]]

    def test_truncated_binary(self):
        with pytest.raises(PGMFormatError, match="truncated") as err:
            load_pgm(b"P5 2 2 255\n" + bytes([1, 2, 3]))
        assert err.value.offset == 14
        assert "byte 14" in str(err.value)

    def test_truncated_ascii(self):
        with pytest.raises(PGMFormatError, match="truncated"):
            load_pgm(b"P2 2 2 255\n1 2 3")

    @pytest.mark.parametrize(
        "data",
        [b"P6 1 1 255\n\x00\x00\x00", b"P5 x 1 255\n\x00", b"P5 1 1", b"", b"P51 1 255\n\x00"],
    )
    def test_malformed_header(self, data):
        with pytest.raises(PGMFormatError):
            load_pgm(data)

    def test_maxval_too_large(self):
        with pytest.raises(PGMFormatError, match="maxval") as err:
            load_pgm(b"P5 1 1 65535\n\x00\x00")
        assert err.value.offset == 7

    def test_value_above_maxval(self):
        with pytest.raises(PGMFormatError):
            load_pgm(b"P2 1 1 10\n11")


class TestSavePGM:
    def test_header_and_payload(self):
        assert save_pgm(GrayImage(np.array([[42]]))) == b"P5\n1 1\n255\n*"

    def test_payload_length(self):
        data = save_pgm(GrayImage(np.zeros((3, 2), dtype=np.uint8)))
        assert data.startswith(b"P5\n2 3\n255\n")
        assert len(data) - len(b"P5\n2 3\n255\n") == 6

    @settings(max_examples=50)
    @given(images)
    def test_round_trip(self, pixels):
        img = GrayImage(pixels)
        back = load_pgm(save_pgm(img))
        assert back == img
        assert back.shape == img.shape


class TestLabelPGM:
    def test_scaled(self):
        labels = LabelMap(np.array([[0, 1, 2, 3]]), 4)
        assert list(save_label_pgm(labels, scale=True)[-4:]) == [0, 85, 170, 255]

    def test_raw(self):
        labels = LabelMap(np.array([[0, 1, 2, 3]]), 4)
        assert list(save_label_pgm(labels, scale=False)[-4:]) == [0, 1, 2, 3]

    def test_binary_scaled(self):
        labels = LabelMap(np.array([[0, 1]]), 2)
        assert list(save_label_pgm(labels, scale=True)[-2:]) == [0, 255]

    @pytest.mark.parametrize("scale", [True, False])
    @pytest.mark.parametrize("c", [2, 3, 4, 5, 8])
    def test_load_inverts_save(self, scale, c):
        rng = np.random.default_rng(c)
        labels = LabelMap(rng.integers(0, c, size=(5, 7)), c)
        assert load_label_pgm(save_label_pgm(labels, scale), c) == labels

    def test_load_rejects_foreign_values(self):
        with pytest.raises(ValueError):
            load_label_pgm(save_pgm(GrayImage(np.array([[0, 100]]))), 4)


class TestHistogram:
    def test_probabilities(self):
        hist = compute_histogram(GrayImage(np.array([[0, 0, 1, 3]]), levels=4))
        np.testing.assert_array_equal(hist.probabilities, [0.5, 0.25, 0.0, 0.25])
        assert hist.counts.tolist() == [2, 1, 0, 1]

    def test_delta(self):
        hist = compute_histogram(GrayImage(np.full((4, 4), 7, dtype=np.uint8)))
        assert hist.probabilities[7] == 1.0
        assert np.count_nonzero(hist.probabilities) == 1

    def test_cum_mean(self):
        hist = compute_histogram(GrayImage(np.array([[0, 0, 1, 3]]), levels=4))
        # 0*0.5 + 1*0.25 + 3*0.25
        assert hist.cum_mean[3] == pytest.approx(1.0, abs=1e-15)
        assert hist.cum_prob[3] == pytest.approx(1.0, abs=1e-12)

    def test_empty_histogram(self):
        with pytest.raises(DegenerateInputError):
            from tissueseg import Histogram

            Histogram(np.zeros(256, dtype=np.int64))

    @settings(max_examples=50)
    @given(images)
    def test_invariants(self, pixels):
        hist = compute_histogram(GrayImage(pixels))
        assert hist.num_bins == 256
        assert abs(hist.probabilities.sum() - 1) <= 1e-12
        assert abs(hist.cum_prob[-1] - 1) <= 1e-12
        assert hist.total == pixels.size

    @settings(max_examples=50)
    @given(images, st.randoms())
    def test_permutation_invariant(self, pixels, rnd):
        flat = pixels.ravel().tolist()
        rnd.shuffle(flat)
        shuffled = np.array(flat, dtype=np.uint8).reshape(pixels.shape)
        assert compute_histogram(GrayImage(shuffled)) == compute_histogram(GrayImage(pixels))


class TestContainers:
    def test_gray_image_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([[0, 4]]), levels=4)

    def test_gray_image_is_read_only(self):
        img = GrayImage(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1

    def test_label_map_bounds(self):
        with pytest.raises(ValueError):
            LabelMap(np.array([[0, 2]]), 2)

    def test_membership_normalization_check(self):
        MembershipImage(np.full((2, 2, 2), 0.5), normalized=True)
        with pytest.raises(ValueError):
            MembershipImage(np.full((2, 2, 2), 0.4), normalized=True)
        with pytest.raises(ValueError):
            MembershipImage(np.full((2, 2, 2), -0.1))
