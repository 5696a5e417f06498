"""Dataset ingestion, synthesis, preprocessing, and on-disk variants.

A dataset is an immutable bundle of an image stack (N, C, H, W), integer
labels (N,), and a manifest describing where it came from and what has
been done to it. The on-disk form is three files sharing a base name:

* ``<base>.manifest`` - JSON with every manifest field
* ``<base>.f32``      - little-endian float32 tensors, image-major,
                        channel-plane order (C then H then W fastest)
* ``<base>.labels``   - one unsigned byte per image

Filtered images leave the [0, 255] range, so variants are stored as
float32 rather than bytes; nothing is ever clipped except for display
export.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DimensionError, IntegrityError
from .masks import MaskProvenance
from .rng import STREAM_AUGMENT, STREAM_SYNTH, stream_rng
from .spectral import centered_frequency_grid

CIFAR10_RECORD_BYTES = 3073  # 1 label byte + 3 * 32 * 32 plane bytes
GCN_STD_FLOOR = 1e-8


@dataclass
class DatasetManifest:
    source: str
    shape: tuple  # (C, H, W)
    count: int
    num_classes: int
    variant: str  # unfiltered | radial | random | augmented | synthetic
    mask: dict | None = None  # MaskProvenance dict when variant is filtered
    preprocessing: list = field(default_factory=list)
    max_imag_residual: float = 0.0
    precision: str = "float32"
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "shape": list(self.shape),
            "count": self.count,
            "num_classes": self.num_classes,
            "variant": self.variant,
            "mask": self.mask,
            "preprocessing": self.preprocessing,
            "max_imag_residual": self.max_imag_residual,
            "precision": self.precision,
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        try:
            return cls(
                source=d["source"],
                shape=tuple(d["shape"]),
                count=d["count"],
                num_classes=d["num_classes"],
                variant=d["variant"],
                mask=d.get("mask"),
                preprocessing=d.get("preprocessing", []),
                max_imag_residual=d.get("max_imag_residual", 0.0),
                precision=d.get("precision", "float32"),
                extra=d.get("extra", {}),
            )
        except KeyError as e:
            raise DataFormatError(f"manifest missing field {e}") from e


@dataclass
class LabeledDataset:
    images: np.ndarray  # (N, C, H, W) float
    labels: np.ndarray  # (N,) int64
    manifest: DatasetManifest

    @property
    def variant(self) -> str:
        return self.manifest.variant

    def __len__(self) -> int:
        return len(self.images)

    def __post_init__(self):
        if self.images.ndim != 4:
            raise DimensionError(f"images must be (N, C, H, W), got {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise DimensionError(
                f"{len(self.images)} images vs {len(self.labels)} labels"
            )
        if len(self.labels) and (
            self.labels.min() < 0 or self.labels.max() >= self.manifest.num_classes
        ):
            raise DataFormatError("labels outside [0, num_classes)")


def make_dataset(
    images: np.ndarray,
    labels: np.ndarray,
    source: str,
    variant: str,
    num_classes: int,
    mask: MaskProvenance | None = None,
    preprocessing: list | None = None,
    max_imag_residual: float = 0.0,
    extra: dict | None = None,
) -> LabeledDataset:
    images = np.asarray(images)
    labels = np.asarray(labels, dtype=np.int64)
    manifest = DatasetManifest(
        source=source,
        shape=tuple(images.shape[1:]),
        count=len(images),
        num_classes=num_classes,
        variant=variant,
        mask=mask.to_dict() if mask is not None else None,
        preprocessing=list(preprocessing or []),
        max_imag_residual=max_imag_residual,
        extra=dict(extra or {}),
    )
    return LabeledDataset(images=images, labels=labels, manifest=manifest)


# ---------------------------------------------------------------------------
# CIFAR-10 binary ingestion
# ---------------------------------------------------------------------------


def load_cifar10(path) -> LabeledDataset:
    """Read CIFAR-10 binary batches (3073-byte records) from a file or dir.

    Directories are read as their sorted ``*.bin`` members concatenated.
    Intensities come back as float64 in [0, 255]; shape (N, 3, 32, 32).
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.bin"))
        if not files:
            raise DataFormatError(f"no .bin files in {path}")
    else:
        if not path.exists():
            raise DataFormatError(f"no such file: {path}")
        files = [path]

    image_parts, label_parts = [], []
    for f in files:
        raw = np.frombuffer(f.read_bytes(), dtype=np.uint8)
        n_full, rem = divmod(raw.size, CIFAR10_RECORD_BYTES)
        if rem != 0:
            raise DataFormatError(
                f"{f}: truncated record at offset {n_full * CIFAR10_RECORD_BYTES}"
            )
        records = raw.reshape(n_full, CIFAR10_RECORD_BYTES)
        labels = records[:, 0]
        bad = np.nonzero(labels >= 10)[0]
        if bad.size:
            raise DataFormatError(
                f"{f}: label {labels[bad[0]]} >= 10 at offset "
                f"{int(bad[0]) * CIFAR10_RECORD_BYTES}"
            )
        image_parts.append(records[:, 1:].reshape(n_full, 3, 32, 32))
        label_parts.append(labels)

    if sum(len(p) for p in image_parts) == 0:
        images = np.zeros((0, 3, 32, 32), dtype=np.float64)
        labels = np.zeros((0,), dtype=np.int64)
    else:
        images = np.concatenate(image_parts).astype(np.float64)
        labels = np.concatenate(label_parts).astype(np.int64)
    return make_dataset(images, labels, source="cifar10", variant="unfiltered", num_classes=10)


def subset_balanced(dataset: LabeledDataset, count: int) -> LabeledDataset:
    """First count/K occurrences of each class, in original order.

    Deterministic (no RNG): selection depends only on the dataset order.
    """
    k = dataset.manifest.num_classes
    if count % k != 0:
        raise ValueError(f"count {count} not divisible by {k} classes")
    per_class = count // k
    keep = []
    seen = dict.fromkeys(range(k), 0)
    for i, lbl in enumerate(dataset.labels):
        if seen[int(lbl)] < per_class:
            seen[int(lbl)] += 1
            keep.append(i)
        if len(keep) == count:
            break
    if len(keep) < count:
        raise DataFormatError(
            f"dataset has too few samples for a balanced subset of {count}"
        )
    idx = np.array(keep)
    return make_dataset(
        dataset.images[idx],
        dataset.labels[idx],
        source=dataset.manifest.source,
        variant=dataset.variant,
        num_classes=k,
        preprocessing=dataset.manifest.preprocessing,
        extra=dataset.manifest.extra,
    )


# ---------------------------------------------------------------------------
# Synthetic datasets with controlled spectral statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLawSpec:
    """Target spectral statistics: expected mode power A / |w|**(2 - eta).

    amplitude == 0 is the degenerate no-noise case used by the two-class
    generator; the DC mode is always left at zero (zero-mean images).
    """

    amplitude: float
    eta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")


def _powerlaw_filter(height: int, width: int, spec: PowerLawSpec) -> np.ndarray:
    """sqrt of the target power per centered mode; DC set to 0."""
    dist = centered_frequency_grid(height, width)
    power = np.zeros((height, width))
    nz = dist > 0
    power[nz] = spec.amplitude / dist[nz] ** (2.0 - spec.eta)
    return np.sqrt(power)


def _powerlaw_field(rng, channels: int, height: int, width: int, amp_filter: np.ndarray):
    """One exactly-real random field with the target expected spectrum.

    White Gaussian noise is shaped in the Fourier domain by a real,
    conjugate-symmetric filter, so the inverse transform is Hermitian and
    its imaginary part is pure roundoff.
    """
    white = rng.standard_normal((channels, height, width))
    g = np.fft.fft2(white, axes=(-2, -1), norm="ortho")
    g *= np.fft.ifftshift(amp_filter)
    out = np.fft.ifft2(g, axes=(-2, -1), norm="ortho")
    return out.real, float(np.max(np.abs(out.imag)))


def synth_powerlaw(
    count: int, channels: int, height: int, width: int, spec: PowerLawSpec
) -> LabeledDataset:
    """Unlabeled-statistics dataset with power-law mode energies."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    amp_filter = _powerlaw_filter(height, width, spec)
    rng = stream_rng(spec.seed, STREAM_SYNTH)
    images = np.empty((count, channels, height, width))
    residual = 0.0
    for n in range(count):
        images[n], res = _powerlaw_field(rng, channels, height, width, amp_filter)
        residual = max(residual, res)
    return make_dataset(
        images,
        np.zeros(count, dtype=np.int64),
        source="synth_powerlaw",
        variant="synthetic",
        num_classes=1,
        max_imag_residual=residual,
        extra={"amplitude": spec.amplitude, "eta": spec.eta, "seed": spec.seed},
    )


def synth_twoclass(
    count: int,
    height: int,
    width: int,
    cue_freq_low: int,
    cue_freq_high: int,
    noise: PowerLawSpec,
    cue_amplitude: float = 1.0,
) -> LabeledDataset:
    """Two classes separated only by the frequency of an added grating.

    Class 0 carries a horizontal grating at cue_freq_low cycles, class 1
    one at cue_freq_high, both with a random phase on top of shared
    power-law background noise. A radial mask with radius between the two
    cue frequencies erases the class-1 cue while leaving class 0's
    intact, which is what makes this a controlled testbed for
    frequency-statistics shortcuts.

    Labels alternate 0, 1, 0, 1, ... so counts split ceil/floor.
    """
    if not 0 < cue_freq_low < cue_freq_high < min(height, width) / 2:
        raise ValueError(
            f"need 0 < low < high < min(H, W)/2, got {cue_freq_low}, {cue_freq_high}"
        )
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    amp_filter = _powerlaw_filter(height, width, noise)
    rng = stream_rng(noise.seed, STREAM_SYNTH)
    xs = np.arange(width)
    images = np.empty((count, 1, height, width))
    labels = np.arange(count, dtype=np.int64) % 2
    residual = 0.0
    for n in range(count):
        base, res = _powerlaw_field(rng, 1, height, width, amp_filter)
        residual = max(residual, res)
        freq = cue_freq_low if labels[n] == 0 else cue_freq_high
        phase = rng.uniform(0.0, 2.0 * np.pi)
        grating = cue_amplitude * np.cos(2.0 * np.pi * freq * xs / width + phase)
        images[n] = base + grating[None, None, :]
    return make_dataset(
        images,
        labels,
        source="synth_twoclass",
        variant="synthetic",
        num_classes=2,
        max_imag_residual=residual,
        extra={
            "cue_freq_low": cue_freq_low,
            "cue_freq_high": cue_freq_high,
            "cue_amplitude": cue_amplitude,
            "noise_amplitude": noise.amplitude,
            "noise_eta": noise.eta,
            "seed": noise.seed,
        },
    )


# ---------------------------------------------------------------------------
# Preprocessing and training-time augmentation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PixelStats:
    """Per-pixel mean/std of a reference split, for contrast normalization."""

    mean: np.ndarray  # (C, H, W)
    std: np.ndarray  # (C, H, W), floored at GCN_STD_FLOOR
    source: str


def gcn_stats(dataset: LabeledDataset) -> PixelStats:
    mean = dataset.images.mean(axis=0)
    std = dataset.images.std(axis=0)
    return PixelStats(
        mean=mean,
        std=np.maximum(std, GCN_STD_FLOOR),
        source=f"{dataset.manifest.source}/{dataset.variant}",
    )


def preprocess(
    dataset: LabeledDataset, mode: str, stats: PixelStats | None = None
) -> LabeledDataset:
    """unit_scale divides by 255; gcn centers/scales per pixel.

    For gcn, ``stats`` selects the reference split; None means "use this
    dataset's own statistics". The manifest records which was used.
    """
    if mode == "unit_scale":
        images = dataset.images / 255.0
        flag = {"mode": "unit_scale"}
    elif mode == "gcn":
        if stats is None:
            stats = gcn_stats(dataset)
        images = (dataset.images - stats.mean) / stats.std
        flag = {"mode": "gcn", "stats_source": stats.source}
    else:
        raise ValueError(f"unknown preprocessing mode {mode!r}")
    m = dataset.manifest
    return LabeledDataset(
        images=images,
        labels=dataset.labels,
        manifest=replace(m, preprocessing=m.preprocessing + [flag]),
    )


def augment_batch(batch: np.ndarray, seed: int) -> np.ndarray:
    """Random horizontal flip, zero-pad 32->40, random 32x32 crop.

    Each image flips independently with probability 1/2; crop offsets are
    uniform over the 9x9 grid. Fully determined by the seed.
    """
    batch = np.asarray(batch)
    if batch.ndim != 4 or batch.shape[-2:] != (32, 32):
        raise DimensionError(f"expected (N, C, 32, 32) batch, got {batch.shape}")
    n = len(batch)
    rng = stream_rng(seed, STREAM_AUGMENT)
    flips = rng.random(n) < 0.5
    offsets = rng.integers(0, 9, size=(n, 2))
    padded = np.zeros(batch.shape[:2] + (40, 40), dtype=batch.dtype)
    padded[:, :, 4:36, 4:36] = batch
    padded[flips] = padded[flips, :, :, ::-1]
    out = np.empty_like(batch)
    for i in range(n):
        oy, ox = offsets[i]
        out[i] = padded[i, :, oy : oy + 32, ox : ox + 32]
    return out


# ---------------------------------------------------------------------------
# Variant persistence
# ---------------------------------------------------------------------------


def _paths(base) -> tuple[Path, Path, Path]:
    base = Path(base)
    return (
        base.with_name(base.name + ".manifest"),
        base.with_name(base.name + ".f32"),
        base.with_name(base.name + ".labels"),
    )


def save_variant(dataset: LabeledDataset, base) -> None:
    """Write <base>.manifest/.f32/.labels; tensors downcast to float32."""
    man_path, f32_path, lbl_path = _paths(base)
    man_path.parent.mkdir(parents=True, exist_ok=True)
    manifest = replace(dataset.manifest, precision="float32")
    man_path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    f32_path.write_bytes(np.ascontiguousarray(dataset.images, dtype="<f4").tobytes())
    lbl_path.write_bytes(dataset.labels.astype(np.uint8).tobytes())


def load_variant(base) -> LabeledDataset:
    """Inverse of save_variant; bit-exact at stored float32 precision."""
    man_path, f32_path, lbl_path = _paths(base)
    if not man_path.exists():
        raise DataFormatError(f"no manifest at {man_path}")
    try:
        manifest = DatasetManifest.from_dict(json.loads(man_path.read_text()))
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{man_path}: invalid JSON: {e}") from e

    c, h, w = manifest.shape
    raw = f32_path.read_bytes()
    expected = manifest.count * c * h * w * 4
    if len(raw) != expected:
        raise IntegrityError(
            f"{f32_path}: manifest promises {expected} bytes, file has {len(raw)}"
        )
    images = np.frombuffer(raw, dtype="<f4").reshape(manifest.count, c, h, w).copy()

    raw_labels = lbl_path.read_bytes()
    if len(raw_labels) != manifest.count:
        raise IntegrityError(
            f"{lbl_path}: manifest promises {manifest.count} labels, "
            f"file has {len(raw_labels)}"
        )
    labels = np.frombuffer(raw_labels, dtype=np.uint8).astype(np.int64)
    return LabeledDataset(images=images, labels=labels, manifest=manifest)
