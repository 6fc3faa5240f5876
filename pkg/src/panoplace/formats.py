"""On-disk formats: point-cloud CSV, PANO panorama binary, PGM renders.

Cloud CSV: a `#meta max_range=.. n_channels=.. points_per_rev=..` line, a
`azimuth_rad,row,range_m,reflectance` header, then one point per line.

PANO: magic "PANO", u8 modality (0 depth, 1 reflectance, 2 cam), u32
height, u32 width, f32 max_range, float32 pixels row-major; little-endian.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .projection import CAM, DEPTH, REFLECTANCE, PanoramicImage, PointCloud, SensorMeta

PANO_MAGIC = b"PANO"
CLOUD_HEADER = "azimuth_rad,row,range_m,reflectance"

_MODALITY_CODE = {DEPTH: 0, REFLECTANCE: 1, CAM: 2}
_CODE_MODALITY = {v: k for k, v in _MODALITY_CODE.items()}


def write_cloud_csv(path: str | Path, cloud: PointCloud) -> None:
    meta = cloud.meta
    lines = [
        f"#meta max_range={meta.max_range!r} n_channels={meta.n_channels}"
        f" points_per_rev={meta.points_per_rev}",
        CLOUD_HEADER,
    ]
    for az, row, rng, refl in zip(cloud.azimuth, cloud.row,
                                  cloud.range_m, cloud.reflectance):
        lines.append(f"{az!r},{row},{rng!r},{refl!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_meta(line: str, path, ln: int) -> SensorMeta:
    fields = {}
    for tok in line[len("#meta"):].split():
        if "=" not in tok:
            raise FormatError(f"{path}:{ln}: bad meta token {tok!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    try:
        return SensorMeta(max_range=float(fields["max_range"]),
                          n_channels=int(fields["n_channels"]),
                          points_per_rev=int(fields["points_per_rev"]))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}:{ln}: incomplete or malformed #meta line") from exc


def read_cloud_csv(path: str | Path) -> PointCloud:
    path = Path(path)
    meta = SensorMeta()
    az, row, rng, refl = [], [], [], []
    for ln, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#meta"):
            meta = _parse_meta(line, path, ln)
            continue
        if line.startswith("#"):
            continue
        if line == CLOUD_HEADER:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise FormatError(f"{path}:{ln}: expected 4 fields, got {len(parts)}")
        try:
            az.append(float(parts[0]))
            row.append(int(parts[1]))
            rng.append(float(parts[2]))
            refl.append(float(parts[3]))
        except ValueError as exc:
            raise FormatError(f"{path}:{ln}: malformed point line {line!r}") from exc
    if not saw_header and not az:
        raise FormatError(f"{path}: no points")
    return PointCloud(np.array(az), np.array(row, dtype=np.int64),
                      np.array(rng), np.array(refl), meta)


def write_pano(path: str | Path, img: PanoramicImage) -> None:
    if img.modality not in _MODALITY_CODE:
        raise FormatError(f"unknown modality {img.modality!r}")
    with open(path, "wb") as f:
        f.write(PANO_MAGIC)
        f.write(struct.pack("<BIIf", _MODALITY_CODE[img.modality],
                            img.height, img.width, img.max_range))
        f.write(np.ascontiguousarray(img.pixels, dtype="<f4").tobytes())


def read_pano(path: str | Path) -> PanoramicImage:
    raw = Path(path).read_bytes()
    if raw[:4] != PANO_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}")
    code, h, w, max_range = struct.unpack_from("<BIIf", raw, 4)
    if code not in _CODE_MODALITY:
        raise FormatError(f"{path}: unknown modality byte {code}")
    off = 4 + struct.calcsize("<BIIf")
    n = h * w
    if len(raw) - off != 4 * n:
        raise FormatError(f"{path}: payload is {len(raw) - off} bytes, expected {4 * n}")
    pixels = np.frombuffer(raw, dtype="<f4", count=n, offset=off).reshape(h, w)
    return PanoramicImage(pixels.astype(np.float64), _CODE_MODALITY[code], float(max_range))


def write_pgm(path: str | Path, values: np.ndarray) -> None:
    """8-bit binary PGM of a [0,1] map (values clipped)."""
    v = np.clip(values, 0.0, 1.0)
    gray = np.round(v * 255).astype(np.uint8)
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(gray.tobytes())
