import numpy as np
import pytest

from motioncheck.wire import decode_payload, encode_block, encode_payload


def test_scalar_roundtrip():
    block = {
        "kind": "scene",
        "frame_id": "000002",
        "n_points": 1071,
        "fraction": 0.125,
        "reviewed": False,
        "note": "looks fine",
    }
    (back,) = decode_payload(encode_payload([block]))
    assert back == block
    assert isinstance(back["frame_id"], str)  # zero-padded ids stay strings
    assert isinstance(back["n_points"], int)
    assert isinstance(back["fraction"], float)
    assert back["reviewed"] is False


def test_array_roundtrip_dtypes():
    rng = np.random.default_rng(0)
    block = {
        "kind": "points",
        "xyz": rng.normal(size=(40, 3)).astype("<f4"),
        "categories": rng.integers(0, 4, size=40).astype("u1"),
        "cluster_ids": rng.integers(-1, 5, size=40).astype("<i4"),
        "raw_index": np.arange(40, dtype="<i8"),
    }
    (back,) = decode_payload(encode_payload([block]))
    for key in ("xyz", "categories", "cluster_ids", "raw_index"):
        np.testing.assert_array_equal(back[key], block[key])
        assert back[key].dtype == block[key].dtype


def test_multiple_blocks_separated_by_blank_lines():
    blocks = [
        {"kind": "header", "n": 2},
        {"kind": "cluster", "cluster_id": 0},
        {"kind": "cluster", "cluster_id": 1},
    ]
    text = encode_payload(blocks)
    assert text.count("\n\n") >= 2
    back = decode_payload(text)
    assert [b["kind"] for b in back] == ["header", "cluster", "cluster"]


def test_strings_that_look_like_numbers_are_quoted():
    text = encode_block({"frame_id": "000001", "name": "42", "plain": "road"})
    assert 'frame_id: "000001"' in text
    assert 'name: "42"' in text
    assert "plain: road" in text
    (back,) = decode_payload(text)
    assert back["frame_id"] == "000001"
    assert back["name"] == "42"
    assert back["plain"] == "road"


def test_floats_preserved_exactly():
    value = 0.1234567890123456789
    (back,) = decode_payload(encode_block({"x": value}))
    assert back["x"] == value


def test_negative_and_special_ints():
    (back,) = decode_payload(encode_block({"a": -1, "b": 0, "c": 2**40}))
    assert back == {"a": -1, "b": 0, "c": 2**40}


def test_empty_array_roundtrip():
    block = {"kind": "points", "xyz": np.zeros((0, 3), "<f4")}
    (back,) = decode_payload(encode_payload([block]))
    assert back["xyz"].shape == (0, 3)


def test_malformed_array_triplet_rejected():
    text = "xyz.dtype: <f4\nxyz.shape: 2 3\n"  # missing the .b64 line
    with pytest.raises(ValueError):
        decode_payload(text)


def test_whitespace_only_payload_is_empty():
    assert decode_payload("\n\n") == []
