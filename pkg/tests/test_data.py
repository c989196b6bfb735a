import numpy as np
import pytest

from tscl.data import (
    PayloadSpec,
    decode_ppm,
    encode_ppm,
    load_directory,
    load_ppm,
    payload_gen,
    save_ppm,
    split_ranges,
    synth_corpus,
    write_corpus,
)
from tscl.errors import ConfigError, PpmError


def test_black_2x2_bytes(tmp_path):
    p = tmp_path / "b.ppm"
    save_ppm(np.zeros((3, 2, 2)), p)
    assert p.read_bytes() == b"P6\n2 2\n255\n" + bytes(12)
    assert np.array_equal(load_ppm(p), np.zeros((3, 2, 2)))


def test_round_trip_quantization(tmp_path):
    img = np.random.default_rng(0).uniform(0, 1, (3, 7, 5))
    p = tmp_path / "r.ppm"
    save_ppm(img, p)
    back = load_ppm(p)
    assert np.max(np.abs(back - img)) <= 1 / 510 + 1e-15
    save_ppm(back, p)
    assert np.array_equal(load_ppm(p), back)


def test_pixel_layout():
    buf = b"P6\n2 1\n255\n" + bytes([255, 0, 0, 0, 0, 255])
    img = decode_ppm(buf)
    assert img.shape == (3, 1, 2)
    assert img[:, 0, 0].tolist() == [1.0, 0.0, 0.0] and img[:, 0, 1].tolist() == [0.0, 0.0, 1.0]


def test_header_comments():
    buf = b"P6 # c\n# full line\n1 1\n255\n" + bytes([0, 51, 255])
    assert decode_ppm(buf)[:, 0, 0].tolist() == [0.0, 0.2, 1.0]


@pytest.mark.parametrize("buf,offset", [
    (b"P3\n1 1\n255\n0 0 0\n", 0),
    (b"P6\n1 x\n255\n", 5),
    (b"P6\n1 1\n65535\n" + bytes(6), 7),
    (b"P6\n0 1\n255\n", 3),
    (b"P6\n2 2\n255\n" + bytes(5), 16),
    (b"P6\n2", 4),
])
def test_malformed_reports_offset(buf, offset):
    with pytest.raises(PpmError) as info:
        decode_ppm(buf)
    assert info.value.offset == offset
    assert f"byte offset {offset}" in str(info.value)


def test_encode_rejects_bad_shape():
    with pytest.raises(ValueError):
        encode_ppm(np.zeros((4, 2, 2)))


def test_splits():
    assert {k: s.stop - s.start for k, s in split_ranges(10).items()} == {"train": 7, "val": 1, "test": 2}
    assert {k: s.stop - s.start for k, s in split_ranges(200).items()} == {"train": 140, "val": 30, "test": 30}
    for c in range(10, 300, 7):
        r = split_ranges(c)
        assert r["train"].start == 0 and r["train"].stop == r["val"].start and r["val"].stop == r["test"].start
        assert r["test"].stop == c


def test_synth_corpus_properties():
    a, b = synth_corpus(1, 40, 32), synth_corpus(1, 40, 32)
    assert a.digest() == b.digest()
    assert synth_corpus(2, 40, 32).digest() != a.digest()
    assert a.images.shape == (40, 3, 32, 32)
    assert a.images.min() >= 0 and a.images.max() <= 1
    means = a.images.mean(axis=(1, 2, 3))
    assert np.all((means > 0.05) & (means < 0.95))
    with pytest.raises(ConfigError):
        synth_corpus(1, 9, 32)


def test_synth_corpus_default_means():
    means = synth_corpus(1, 200, 32).images.mean(axis=(1, 2, 3))
    assert np.all((means > 0.05) & (means < 0.95))


def test_corpus_directory_round_trip(tmp_path):
    ds = synth_corpus(3, 20, 16)
    write_corpus(ds, tmp_path)
    assert len(list((tmp_path / "train").glob("*.ppm"))) == 14
    back = load_directory(tmp_path)
    assert back.splits == ds.splits
    assert np.max(np.abs(back.images - ds.images)) <= 1 / 510 + 1e-15


def test_empty_directory(tmp_path):
    with pytest.raises(ConfigError):
        load_directory(tmp_path)


def test_payloads():
    spec = PayloadSpec(depth=3, seed=4)
    a = payload_gen(spec, 2, 16)
    assert a.shape == (2, 3, 16, 16)
    assert np.array_equal(a, payload_gen(spec, 2, 16))
    assert set(np.unique(a)) <= {0.0, 1.0}
    big = payload_gen(PayloadSpec(depth=1, seed=0), 100, 32)  # 102400 bits
    assert 0.48 <= big.mean() <= 0.52
    with pytest.raises(ConfigError):
        PayloadSpec(depth=0)
