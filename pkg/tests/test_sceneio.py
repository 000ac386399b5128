import json
import math
import struct

import numpy as np
import pytest

from projpool.errors import (
    BadMagic,
    ParseError,
    PolarLatitude,
    TruncatedPayload,
    UnsupportedVersion,
    ValidationError,
)
from projpool.sceneio import (
    dumps_scene,
    load_scene,
    load_tensor,
    loads_scene,
    meters_per_pixel,
    save_scene,
    save_tensor,
)
from projpool.synth import SynthConfig, generate_scene


MINIMAL = {
    "building": {"outline": [[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]]},
    "occluders": [],
    "cameras": [
        {"id": 0, "position": [5.0, -8.0], "direction": 1.5707963267948966,
         "fov": 1.0471975511965976, "stripe_width": 16}
    ],
    "grid": {"rows": 16, "cols": 16, "origin": [-3.0, -3.0], "cell_size": 1.0},
}


class TestSceneFormat:
    def test_minimal_round_trip(self, tmp_path):
        doc = loads_scene(json.dumps(MINIMAL))
        p = tmp_path / "scene.json"
        save_scene(doc, p)
        again = load_scene(p)
        save_scene(again, tmp_path / "scene2.json")
        assert (tmp_path / "scene2.json").read_bytes() == p.read_bytes()
        assert len(again.cameras) == 1
        assert again.grid.rows == 16

    def test_synth_round_trip(self, tmp_path):
        doc = generate_scene(SynthConfig(seed=77, n_vertices=9, n_cameras=3,
                                         occluder_count=2, convex=False))
        p = tmp_path / "scene.json"
        save_scene(doc, p)
        save_scene(load_scene(p), tmp_path / "again.json")
        assert (tmp_path / "again.json").read_bytes() == p.read_bytes()

    def test_camera_inside_rejected(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc["cameras"][0]["position"] = [5.0, 5.0]
        with pytest.raises(ValidationError, match="inside"):
            loads_scene(json.dumps(doc))

    def test_fov_bounds(self):
        for fov in (0.0, -1.0, 2 * math.pi, 7.0):
            doc = json.loads(json.dumps(MINIMAL))
            doc["cameras"][0]["fov"] = fov
            with pytest.raises(ValidationError, match="fov"):
                loads_scene(json.dumps(doc))

    def test_unknown_field_strict(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc["cameras"][0]["zoom"] = 3
        with pytest.raises(ParseError, match="zoom"):
            loads_scene(json.dumps(doc))
        assert loads_scene(json.dumps(doc), allow_unknown=True)

    def test_missing_field(self):
        doc = json.loads(json.dumps(MINIMAL))
        del doc["grid"]["cell_size"]
        with pytest.raises(ParseError, match="cell_size"):
            loads_scene(json.dumps(doc))

    def test_bad_polygon_named(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc["occluders"] = [[[20.0, 0.0], [30.0, 10.0], [30.0, 0.0], [20.0, 10.0]]]
        with pytest.raises(ValidationError, match=r"occluders\[0\]"):
            loads_scene(json.dumps(doc))

    def test_sparse_camera_ids_rejected(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc["cameras"][0]["id"] = 1
        with pytest.raises(ValidationError, match="dense"):
            loads_scene(json.dumps(doc))

    def test_not_json(self):
        with pytest.raises(ParseError):
            loads_scene("{nope")

    def test_many_cameras_warn(self):
        doc = json.loads(json.dumps(MINIMAL))
        doc["cameras"] = [
            {"id": i, "position": [5.0 + 0.1 * i, -8.0], "direction": 1.57,
             "fov": 1.0, "stripe_width": 16}
            for i in range(10)
        ]
        with pytest.warns(UserWarning, match="cameras"):
            loads_scene(json.dumps(doc))

    def test_dumps_matches_schema(self):
        text = dumps_scene(loads_scene(json.dumps(MINIMAL)))
        doc = json.loads(text)
        assert set(doc) == {"building", "occluders", "cameras", "grid"}
        assert text.endswith("\n")


class TestTensorFormat:
    def test_round_trip_sizes(self, tmp_path):
        arr = np.arange(1, 7, dtype=np.float32).reshape(2, 3)
        p = tmp_path / "t.pptf"
        save_tensor(arr, p)
        assert p.stat().st_size == 8 + 2 * 4 + 24
        assert np.array_equal(load_tensor(p), arr)

    def test_round_trip_shapes(self, tmp_path, rng):
        for shape in [(4,), (3, 5), (2, 3, 4), (2, 2, 2, 2)]:
            arr = rng.normal(size=shape).astype(np.float32)
            p = tmp_path / "t.pptf"
            save_tensor(arr, p)
            back = load_tensor(p)
            assert back.shape == arr.shape
            assert np.array_equal(back, arr)

    def test_zero_dim_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            save_tensor(np.zeros((0, 3), np.float32), tmp_path / "t.pptf")

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "t.pptf"
        p.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(BadMagic):
            load_tensor(p)

    def test_unsupported_version(self, tmp_path):
        p = tmp_path / "t.pptf"
        p.write_bytes(struct.pack("<4sBBBB", b"PPTF", 2, 1, 1, 0)
                      + struct.pack("<I", 1) + struct.pack("<f", 0.0))
        with pytest.raises(UnsupportedVersion):
            load_tensor(p)

    def test_truncated(self, tmp_path):
        p = tmp_path / "t.pptf"
        save_tensor(np.ones((2, 3), np.float32), p)
        blob = p.read_bytes()
        p.write_bytes(blob[:-4])
        with pytest.raises(TruncatedPayload):
            load_tensor(p)
        p.write_bytes(blob[:6])
        with pytest.raises(TruncatedPayload):
            load_tensor(p)

    def test_endianness_is_little(self, tmp_path):
        # handcrafted 24-byte fixture: [2, 2] tensor holding 1.0 2.0 3.0 4.0
        payload = b"".join(struct.pack("<f", v) for v in (1.0, 2.0, 3.0, 4.0))
        blob = struct.pack("<4sBBBB", b"PPTF", 1, 1, 2, 0) \
            + struct.pack("<II", 2, 2) + payload
        assert len(blob) == 8 + 8 + 16
        p = tmp_path / "t.pptf"
        p.write_bytes(blob)
        assert np.array_equal(load_tensor(p), [[1.0, 2.0], [3.0, 4.0]])
        # the same values written big-endian parse to garbage, not 1..4
        swapped = struct.pack("<4sBBBB", b"PPTF", 1, 1, 2, 0) \
            + struct.pack("<II", 2, 2) \
            + b"".join(struct.pack(">f", v) for v in (1.0, 2.0, 3.0, 4.0))
        p.write_bytes(swapped)
        assert not np.array_equal(load_tensor(p), [[1.0, 2.0], [3.0, 4.0]])


class TestMetersPerPixel:
    def test_equator(self):
        assert meters_per_pixel(0.0) == pytest.approx(0.29858, abs=1e-4)

    def test_cosine_scaling(self):
        assert meters_per_pixel(60.0) == pytest.approx(
            0.5 * meters_per_pixel(0.0), rel=1e-12)
        assert meters_per_pixel(45.0) == meters_per_pixel(-45.0)

    def test_poles(self):
        for lat in (90.0, -90.0, 95.0):
            with pytest.raises(PolarLatitude):
                meters_per_pixel(lat)
