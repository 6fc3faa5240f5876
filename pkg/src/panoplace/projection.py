"""Cylindrical projection of LiDAR point clouds into panoramic images.

Azimuth maps to columns, the elevation channel index maps to rows (row 0 is
the highest channel), ranges are scaled by the sensor's max range into
[0,1], and 0 encodes "no return". Depth and reflectance stay aligned by
construction: on a pixel collision the nearest return wins both modalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

TWO_PI = 2.0 * np.pi

DEPTH = "depth"
REFLECTANCE = "reflectance"
CAM = "cam"


@dataclass(frozen=True)
class SensorMeta:
    """Velodyne HDL-32e defaults: 100 m limit, 32 channels, 2166 steps/rev."""
    max_range: float = 100.0
    n_channels: int = 32
    points_per_rev: int = 2166


@dataclass
class PointCloud:
    """Raw LiDAR returns, structure-of-arrays.

    azimuth: radians (normalized mod 2*pi at projection time); row: integer
    elevation channel, 0 = highest; range_m: meters > 0; reflectance: [0,1].
    """
    azimuth: np.ndarray
    row: np.ndarray
    range_m: np.ndarray
    reflectance: np.ndarray
    meta: SensorMeta = field(default_factory=SensorMeta)

    def __post_init__(self):
        self.azimuth = np.asarray(self.azimuth, dtype=np.float64)
        self.row = np.asarray(self.row, dtype=np.int64)
        self.range_m = np.asarray(self.range_m, dtype=np.float64)
        self.reflectance = np.asarray(self.reflectance, dtype=np.float64)
        n = self.azimuth.shape[0]
        if not (self.row.shape[0] == self.range_m.shape[0]
                == self.reflectance.shape[0] == n):
            raise ContractViolation("point cloud field lengths differ")
        if n and (self.row.min() < 0 or self.row.max() >= self.meta.n_channels):
            raise ContractViolation("elevation row outside [0, n_channels)")
        if n and self.range_m.min() <= 0:
            raise ContractViolation("ranges must be positive")

    def __len__(self) -> int:
        return self.azimuth.shape[0]


@dataclass
class PanoramicImage:
    """H x W raster in [0,1]; one modality; 0 means no return for depth."""
    pixels: np.ndarray
    modality: str
    max_range: float

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def rotate_azimuth(cloud: PointCloud, theta: float) -> PointCloud:
    """Rotate a cloud around the vertical axis by theta radians."""
    return PointCloud(np.mod(cloud.azimuth + theta, TWO_PI), cloud.row.copy(),
                      cloud.range_m.copy(), cloud.reflectance.copy(), cloud.meta)


def project_scan(cloud: PointCloud, width: int) -> tuple[PanoramicImage, PanoramicImage]:
    """Project a cloud into aligned depth and reflectance panoramas.

    column = floor(azimuth / 2pi * width) clamped to [0, width-1]; on pixel
    collisions the minimum-range point (first in input order on ties) wins
    for both modalities; untouched pixels stay 0.
    """
    if len(cloud) == 0:
        raise ContractViolation("cannot project an empty point cloud")
    if width < 1:
        raise ContractViolation(f"width must be >= 1, got {width}")
    meta = cloud.meta
    h = meta.n_channels
    az = np.mod(cloud.azimuth, TWO_PI)
    col = np.minimum(np.floor(az / TWO_PI * width).astype(np.int64), width - 1)
    rng = np.minimum(cloud.range_m, meta.max_range)

    pix = cloud.row * width + col
    order = np.lexsort((np.arange(len(cloud)), rng))
    occupied, first = np.unique(pix[order], return_index=True)
    chosen = order[first]

    depth = np.zeros((h, width))
    refl = np.zeros((h, width))
    depth.flat[occupied] = rng[chosen] / meta.max_range
    refl.flat[occupied] = cloud.reflectance[chosen]
    return (PanoramicImage(depth, DEPTH, meta.max_range),
            PanoramicImage(refl, REFLECTANCE, meta.max_range))


def resample_bilinear(pixels: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resampling with wrapped columns and clamped rows.

    Pixel-center mapping, so equal sizes reproduce the input exactly. Used
    for both panorama downsampling and attention-map upsampling.
    """
    h, w = pixels.shape
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    x0w = np.mod(x0, w)
    x1w = np.mod(x0 + 1, w)
    p00 = pixels[np.ix_(y0c, x0w)]
    p01 = pixels[np.ix_(y0c, x1w)]
    p10 = pixels[np.ix_(y1c, x0w)]
    p11 = pixels[np.ix_(y1c, x1w)]
    return ((1 - fy) * (1 - fx) * p00 + (1 - fy) * fx * p01
            + fy * (1 - fx) * p10 + fy * fx * p11)


def downsample_bilinear(img: PanoramicImage, out_w: int, out_h: int) -> PanoramicImage:
    """Bilinear downsampling; upsampling requests violate the contract."""
    if out_w > img.width or out_h > img.height:
        raise ContractViolation(
            f"downsample target {out_w}x{out_h} exceeds source {img.width}x{img.height}")
    out = resample_bilinear(img.pixels, out_h, out_w)
    return PanoramicImage(out, img.modality, img.max_range)
