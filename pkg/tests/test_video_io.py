import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from cuedetect.video_io import (
    Frame,
    SequenceError,
    list_frames,
    list_groundtruth,
    load_groundtruth,
    load_sequence,
    mask_filename,
    read_mask,
    read_temporal_roi,
    to_gray,
    write_mask,
)

from conftest import write_frames


def test_to_gray_examples():
    assert to_gray((0, 0, 0)) == 0
    assert to_gray((255, 255, 255)) == 255
    assert to_gray((100, 150, 200)) == 141


def test_to_gray_matches_float_reference(rng):
    rgb = rng.integers(0, 256, (200, 3))
    expected = np.floor(0.299 * rgb[:, 0] + 0.587 * rgb[:, 1] + 0.114 * rgb[:, 2] + 0.5 + 1e-9)
    np.testing.assert_array_equal(to_gray(rgb), expected.astype(np.uint8))


@given(st.integers(0, 255))
def test_to_gray_of_gray_pixel_is_identity(v):
    assert to_gray((v, v, v)) == v


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255), st.integers(0, 2))
def test_to_gray_monotone_in_each_channel(r, g, b, ch):
    lo = [r, g, b]
    hi = list(lo)
    hi[ch] = min(255, hi[ch] + 1)
    assert to_gray(hi) >= to_gray(lo)


def test_to_gray_rejects_non_rgb():
    with pytest.raises(ValueError):
        to_gray(np.zeros((4, 4)))


def test_load_sequence_enumerates_in_order(tmp_path):
    frames = [np.full((4, 5, 3), v, dtype=np.uint8) for v in (10, 20, 30)]
    write_frames(tmp_path / "input", frames)
    out = list(load_sequence(tmp_path))
    assert [f.index for f in out] == [1, 2, 3]
    assert [int(f.rgb[0, 0, 0]) for f in out] == [10, 20, 30]
    assert out[0].gray.shape == (4, 5)


def test_numeric_not_lexicographic_order(tmp_path):
    tmp_path.joinpath("frames").mkdir()
    for n in (10, 2, 1):
        Image.fromarray(np.full((2, 2, 3), n, np.uint8)).save(tmp_path / "frames" / f"f{n}.png")
    assert [n for n, _ in list_frames(tmp_path / "frames")] == [1, 2, 10]


def test_empty_directory_errors(tmp_path):
    with pytest.raises(SequenceError, match="no frames found"):
        list(load_sequence(tmp_path))


def test_missing_directory_errors(tmp_path):
    with pytest.raises(SequenceError, match="not found"):
        list(load_sequence(tmp_path / "absent"))


def test_dimension_mismatch_names_frame(tmp_path):
    write_frames(tmp_path, [np.zeros((4, 4, 3)), np.zeros((5, 4, 3))])
    with pytest.raises(SequenceError, match="frame 2"):
        list(load_sequence(tmp_path))


def test_unreadable_file_named(tmp_path):
    write_frames(tmp_path, [np.zeros((4, 4, 3))])
    (tmp_path / "in000002.png").write_bytes(b"not an image")
    with pytest.raises(SequenceError, match="in000002.png"):
        list(load_sequence(tmp_path))


def test_duplicate_frame_numbers_rejected(tmp_path):
    write_frames(tmp_path, [np.zeros((2, 2, 3))])
    Image.fromarray(np.zeros((2, 2, 3), np.uint8)).save(tmp_path / "in000001.jpg")
    with pytest.raises(SequenceError, match="duplicate"):
        list_frames(tmp_path)


def test_frame_validates_shape():
    with pytest.raises(ValueError):
        Frame(np.zeros((4, 4)))


def test_all_background_mask_is_zeros(tmp_path):
    write_mask(np.zeros((3, 4), bool), tmp_path / "m.png")
    raw = np.asarray(Image.open(tmp_path / "m.png"))
    assert raw.dtype == np.uint8 and not raw.any()


@settings(max_examples=30, deadline=None)
@given(arrays(bool, st.tuples(st.integers(1, 20), st.integers(1, 20))))
def test_mask_round_trip(tmp_path_factory, mask):
    path = tmp_path_factory.mktemp("m") / mask_filename(7)
    write_mask(mask, path)
    raw = np.asarray(Image.open(path))
    assert set(np.unique(raw)) <= {0, 255}
    np.testing.assert_array_equal(read_mask(path), mask)


def test_mask_filename():
    assert mask_filename(12) == "bin000012.png"


def test_groundtruth_codes_verbatim(tmp_path):
    gt = np.array([[0, 50, 85], [170, 255, 0]], dtype=np.uint8)
    Image.fromarray(gt).save(tmp_path / "gt000001.png")
    np.testing.assert_array_equal(load_groundtruth(tmp_path / "gt000001.png"), gt)


def test_groundtruth_invalid_code_rejected(tmp_path):
    Image.fromarray(np.array([[0, 128]], dtype=np.uint8)).save(tmp_path / "gt.png")
    with pytest.raises(SequenceError, match="invalid codes"):
        load_groundtruth(tmp_path / "gt.png")


def test_groundtruth_rgb_with_equal_channels_accepted(tmp_path):
    gt = np.stack([np.array([[0, 255]], np.uint8)] * 3, axis=-1)
    Image.fromarray(gt).save(tmp_path / "gt.png")
    np.testing.assert_array_equal(load_groundtruth(tmp_path / "gt.png"), [[0, 255]])


def test_list_groundtruth_descends(tmp_path):
    write_frames(tmp_path / "groundtruth", [np.zeros((2, 2))] * 2, prefix="gt")
    assert [n for n, _ in list_groundtruth(tmp_path)] == [1, 2]


def test_temporal_roi(tmp_path):
    (tmp_path / "temporalROI.txt").write_text("470 1700\n")
    assert read_temporal_roi(tmp_path / "temporalROI.txt") == (470, 1700)
    (tmp_path / "bad.txt").write_text("5\n")
    with pytest.raises(SequenceError):
        read_temporal_roi(tmp_path / "bad.txt")
