import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from segconf.errors import ValidationError
from segconf.grids import BinaryMask, Image, Sample, ScoreMap


def make_image(h=4, w=4, c=3, value=0.5):
    return Image(np.full((h, w, c), value, dtype=np.float32))


def make_mask(h=4, w=4, value=0):
    return BinaryMask(np.full((h, w), value, dtype=np.uint8))


class TestScoreMap:
    def test_accepts_unit_range(self):
        m = ScoreMap(np.array([[0.0, 1.0], [0.5, 0.25]], dtype=np.float32))
        assert m.height == 2 and m.width == 2

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError, match="out of range"):
            ScoreMap(np.array([[1.5]], dtype=np.float32))

    def test_rejects_nan(self):
        with pytest.raises(ValidationError, match="non-finite"):
            ScoreMap(np.array([[np.nan]], dtype=np.float32))

    def test_rejects_wrong_rank(self):
        with pytest.raises(ValidationError):
            ScoreMap(np.zeros((2, 2, 2), dtype=np.float32))

    def test_immutable(self):
        m = ScoreMap(np.zeros((2, 2), dtype=np.float32))
        with pytest.raises(ValueError):
            m.data[0, 0] = 1.0


class TestImage:
    def test_channels_limited(self):
        with pytest.raises(ValidationError):
            Image(np.zeros((2, 2, 2), dtype=np.float32))

    def test_from_uint8_divides_by_255(self):
        img = Image.from_uint8(np.full((2, 2, 3), 51, dtype=np.uint8))
        assert np.all(img.data == np.float32(51) / np.float32(255))

    def test_plane_roundtrip(self):
        data = np.random.default_rng(0).random((3, 5, 3)).astype(np.float32)
        img = Image(data)
        for c in range(3):
            assert np.array_equal(img.plane(c), data[:, :, c])


class TestBinaryMask:
    def test_accepts_zero_one(self):
        m = BinaryMask(np.array([[0, 1], [1, 0]], dtype=np.uint8))
        assert m.foreground_fraction() == 0.5

    def test_rejects_other_values(self):
        with pytest.raises(ValidationError):
            BinaryMask(np.array([[0, 2]], dtype=np.uint8))

    def test_accepts_bool(self):
        m = BinaryMask(np.array([[True, False]]))
        assert m.data.dtype == np.uint8


class TestSample:
    def test_shape_agreement_enforced(self):
        with pytest.raises(ValidationError, match="disagree"):
            Sample(id="a", post_image=make_image(4, 4), truth=BinaryMask(np.zeros((3, 3), np.uint8)))

    def test_pre_image_optional(self):
        s = Sample(id="a", post_image=make_image(), truth=make_mask())
        assert not s.is_multi
        s2 = Sample(id="a", post_image=make_image(), truth=make_mask(), pre_image=make_image())
        assert s2.is_multi

    def test_empty_id_rejected(self):
        with pytest.raises(ValidationError):
            Sample(id="", post_image=make_image(), truth=make_mask())


@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
def test_constructors_reject_only_on_contract(h, w, seed):
    rng = np.random.default_rng(seed)
    data = rng.random((h, w)).astype(np.float32)
    m = ScoreMap(data)
    assert m.data.shape == (h, w)
    mask = BinaryMask((data >= 0.5).astype(np.uint8))
    assert set(np.unique(mask.data)) <= {0, 1}
