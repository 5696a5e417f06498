"""Binary Fourier-domain masks in centered coordinates.

Two kinds are supported:

* radial: keep every mode within l2 radius ``r`` of the centered DC
  component (inclusive boundary). The same plane is used for every
  channel, so the mask is conjugate-symmetric and filtering a real image
  with it stays real.
* random: zero each mode independently with probability ``p``, drawn
  once per channel from its own Philox substream. A mask object is
  generated once per experiment and reused for every image of both the
  train and the test split.

Masks are never stored as bitmaps; provenance (kind, parameter, seed) is
enough to regenerate them bit-identically.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .rng import STREAM_MASK_CHANNEL, stream_rng
from .spectral import centered_frequency_grid


@dataclass(frozen=True)
class MaskProvenance:
    kind: str  # "radial" | "random"
    radius: float | None = None
    drop_prob: float | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "radius": self.radius,
            "drop_prob": self.drop_prob,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MaskProvenance":
        return cls(
            kind=d["kind"],
            radius=d.get("radius"),
            drop_prob=d.get("drop_prob"),
            seed=d.get("seed"),
        )


@dataclass(frozen=True)
class FourierMask:
    """{0,1} mask over centered spectra, shape (C, H, W)."""

    data: np.ndarray  # uint8, values in {0, 1}
    provenance: MaskProvenance

    @property
    def shape(self) -> tuple:
        return self.data.shape


def radial_mask(height: int, width: int, channels: int, radius: float) -> FourierMask:
    """Keep modes with centered distance <= radius; identical per channel."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if channels < 1:
        raise DimensionError(f"channel count must be >= 1, got {channels}")
    dist = centered_frequency_grid(height, width)
    plane = (dist <= radius).astype(np.uint8)
    data = np.broadcast_to(plane, (channels, height, width)).copy()
    return FourierMask(data, MaskProvenance(kind="radial", radius=float(radius)))


def random_mask(
    height: int, width: int, channels: int, drop_prob: float, seed: int
) -> FourierMask:
    """Zero each mode independently with probability drop_prob.

    Channel c draws from the Philox substream (seed, STREAM_MASK_CHANNEL + c),
    so channels are independent and the whole mask is a pure function of
    (H, W, C, p, seed). The DC mode gets no special treatment and may be
    dropped like any other.
    """
    if not 0.0 <= drop_prob <= 1.0:
        raise ValueError(f"drop probability must be in [0, 1], got {drop_prob}")
    if channels < 1:
        raise DimensionError(f"channel count must be >= 1, got {channels}")
    if height % 2 != 0 or width % 2 != 0:
        raise DimensionError(f"height and width must be even, got {height}x{width}")
    data = np.empty((channels, height, width), dtype=np.uint8)
    for c in range(channels):
        rng = stream_rng(seed, STREAM_MASK_CHANNEL + c)
        data[c] = (rng.random((height, width)) >= drop_prob).astype(np.uint8)
    return FourierMask(
        data, MaskProvenance(kind="random", drop_prob=float(drop_prob), seed=int(seed))
    )


def mask_from_provenance(
    height: int, width: int, channels: int, provenance: MaskProvenance
) -> FourierMask:
    """Regenerate a mask from its recorded provenance."""
    if provenance.kind == "radial":
        return radial_mask(height, width, channels, provenance.radius)
    if provenance.kind == "random":
        return random_mask(height, width, channels, provenance.drop_prob, provenance.seed)
    raise ValueError(f"unknown mask kind {provenance.kind!r}")


def keep_fraction(mask: FourierMask) -> float:
    """Fraction of modes kept: (# ones) / (C*H*W)."""
    return float(mask.data.sum()) / mask.data.size
