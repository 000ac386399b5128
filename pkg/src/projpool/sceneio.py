"""Canonical file formats: scene documents, tensor files, geodetic helper.

Scene documents are strict JSON (unknown fields rejected unless explicitly
allowed); angles are radians, lengths meters.  Tensors use a tiny binary
container: magic "PPTF", version 1, little-endian float32 payload.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np
from shapely.geometry import Point as _ShPoint

from .errors import (
    BadMagic,
    ParseError,
    PolarLatitude,
    TruncatedPayload,
    UnsupportedVersion,
    ValidationError,
)
from .geometry import TWO_PI, CameraPose, Polygon, validate_polygon
from .grid import GridSpec

EQUATOR_LENGTH_M = 40075016.686  # WGS84 equatorial circumference

_MAGIC = b"PPTF"
_VERSION = 1
_DTYPE_F32 = 1


@dataclass(frozen=True)
class SceneDoc:
    """A building, its occluders, the cameras, and the top-view grid.

    Cameras are ordered by id, ids dense from 0.
    """

    building: Polygon
    occluders: tuple
    cameras: tuple
    grid: GridSpec

    def polygons(self) -> list[Polygon]:
        return [self.building] + list(self.occluders)


def _require_keys(obj: dict, required, where: str, strict: bool) -> None:
    missing = set(required) - set(obj)
    if missing:
        raise ParseError(f"{where}: missing field(s) {sorted(missing)}")
    if strict:
        extra = set(obj) - set(required)
        if extra:
            raise ParseError(
                f"{where}: unknown field(s) {sorted(extra)} (strict mode)"
            )


def _validate_scene(building, occluders, cameras, grid) -> SceneDoc:
    polys = [building] + list(occluders)
    for cam_id, cam in enumerate(cameras):
        pt = _ShPoint(cam.position)
        for pid, poly in enumerate(polys):
            if poly.shapely().contains(pt):
                raise ValidationError(
                    f"camera {cam_id} lies strictly inside polygon {pid}"
                )
    if len(cameras) > 9:
        warnings.warn(
            f"{len(cameras)} cameras; typical scenes carry between 1 and 9",
            stacklevel=3,
        )
    return SceneDoc(building=building, occluders=tuple(occluders),
                    cameras=tuple(cameras), grid=grid)


def loads_scene(text: str, allow_unknown: bool = False) -> SceneDoc:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"scene document is not valid JSON: {exc}") from None
    strict = not allow_unknown
    if not isinstance(doc, dict):
        raise ParseError("scene document must be a JSON object")
    _require_keys(doc, {"building", "occluders", "cameras", "grid"}, "scene", strict)

    _require_keys(doc["building"], {"outline"}, "building", strict)
    try:
        building = validate_polygon(doc["building"]["outline"])
    except Exception as exc:
        raise ValidationError(f"building outline: {exc}") from None
    occluders = []
    for i, ring in enumerate(doc["occluders"]):
        try:
            occluders.append(validate_polygon(ring))
        except Exception as exc:
            raise ValidationError(f"occluders[{i}]: {exc}") from None

    cams_raw = doc["cameras"]
    by_id = {}
    for i, c in enumerate(cams_raw):
        _require_keys(c, {"id", "position", "direction", "fov", "stripe_width"},
                      f"cameras[{i}]", strict)
        cid = c["id"]
        if not isinstance(cid, int) or cid in by_id:
            raise ValidationError(f"cameras[{i}]: id must be a unique integer")
        fov = float(c["fov"])
        if not (0.0 < fov < TWO_PI):
            raise ValidationError(f"cameras[{i}]: fov must lie in (0, 2*pi), got {fov}")
        sw = c["stripe_width"]
        if not isinstance(sw, int) or sw < 1:
            raise ValidationError(f"cameras[{i}]: stripe_width must be a positive integer")
        pos = c["position"]
        if len(pos) != 2:
            raise ValidationError(f"cameras[{i}]: position must be [x, y]")
        by_id[cid] = CameraPose(position=np.asarray(pos, dtype=np.float64),
                                direction=float(c["direction"]), fov=fov,
                                stripe_width=sw)
    if sorted(by_id) != list(range(len(by_id))):
        raise ValidationError("camera ids must be dense from 0")
    cameras = [by_id[i] for i in range(len(by_id))]

    g = doc["grid"]
    _require_keys(g, {"rows", "cols", "origin", "cell_size"}, "grid", strict)
    try:
        grid = GridSpec(rows=int(g["rows"]), cols=int(g["cols"]),
                        origin=np.asarray(g["origin"], dtype=np.float64),
                        cell_size=float(g["cell_size"]))
    except ValueError as exc:
        raise ValidationError(f"grid: {exc}") from None
    return _validate_scene(building, occluders, cameras, grid)


def load_scene(path, allow_unknown: bool = False) -> SceneDoc:
    with open(path, "r", encoding="utf-8") as f:
        return loads_scene(f.read(), allow_unknown=allow_unknown)


def dumps_scene(doc: SceneDoc) -> str:
    def ring(poly: Polygon):
        return [[float(x), float(y)] for x, y in poly.vertices]

    obj = {
        "building": {"outline": ring(doc.building)},
        "occluders": [ring(p) for p in doc.occluders],
        "cameras": [
            {
                "id": i,
                "position": [float(c.position[0]), float(c.position[1])],
                "direction": float(c.direction),
                "fov": float(c.fov),
                "stripe_width": int(c.stripe_width),
            }
            for i, c in enumerate(doc.cameras)
        ],
        "grid": {
            "rows": doc.grid.rows,
            "cols": doc.grid.cols,
            "origin": [float(doc.grid.origin[0]), float(doc.grid.origin[1])],
            "cell_size": float(doc.grid.cell_size),
        },
    }
    return json.dumps(obj, indent=1) + "\n"


def save_scene(doc: SceneDoc, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(dumps_scene(doc))


# ---------------------------------------------------------------------------
# tensor container
# ---------------------------------------------------------------------------


def save_tensor(arr: np.ndarray, path) -> None:
    """Write a float32 tensor: PPTF magic, version/dtype bytes, uint32 dims,
    row-major little-endian payload."""
    arr = np.asarray(arr, dtype=np.float32)
    if arr.ndim < 1 or any(s < 1 for s in arr.shape):
        raise ValidationError("tensor must have at least one dim, all dims positive")
    header = struct.pack("<4sBBBB", _MAGIC, _VERSION, _DTYPE_F32, arr.ndim, 0)
    dims = struct.pack("<%dI" % arr.ndim, *arr.shape)
    with open(path, "wb") as f:
        f.write(header)
        f.write(dims)
        f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_tensor(path) -> np.ndarray:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 8:
        raise TruncatedPayload(f"file too short for a tensor header ({len(blob)} bytes)")
    magic, version, dtype, ndim, reserved = struct.unpack("<4sBBBB", blob[:8])
    if magic != _MAGIC:
        raise BadMagic(f"bad magic {magic!r}, expected {_MAGIC!r}")
    if version != _VERSION or dtype != _DTYPE_F32 or reserved != 0:
        raise UnsupportedVersion(
            f"unsupported header version={version} dtype={dtype} reserved={reserved}"
        )
    if len(blob) < 8 + 4 * ndim:
        raise TruncatedPayload("file ends inside the dims table")
    dims = struct.unpack("<%dI" % ndim, blob[8:8 + 4 * ndim])
    if ndim < 1 or any(d < 1 for d in dims):
        raise ValidationError(f"tensor dims must all be positive, got {dims}")
    expected = 4 * int(np.prod(dims))
    payload = blob[8 + 4 * ndim:]
    if len(payload) != expected:
        raise TruncatedPayload(
            f"payload is {len(payload)} bytes, dims {dims} require {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(dims).astype(np.float32)


def meters_per_pixel(latitude: float) -> float:
    """Ground resolution of a zoom-19 slippy-map tile at the given latitude."""
    if abs(latitude) >= 90.0:
        raise PolarLatitude(f"latitude {latitude} has no defined resolution")
    return EQUATOR_LENGTH_M * math.cos(math.radians(latitude)) / 2 ** 27
