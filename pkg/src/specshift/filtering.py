"""Apply Fourier masks to images and whole datasets.

Filtering is transform -> Hadamard product with the mask -> inverse
transform, taking the real part. Radial masks are conjugate-symmetric so
the imaginary part they discard is pure roundoff; random masks genuinely
break the symmetry and the discarded magnitude is reported, never hidden.

Filtering happens on raw-intensity images, before any training-time
normalization; filtered pixels may leave [0, 255] and are kept as-is.
"""

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset, make_dataset
from .errors import DimensionError
from .masks import FourierMask, radial_mask, random_mask
from .spectral import dft2, idft2


@dataclass(frozen=True)
class FilterOutcome:
    image: np.ndarray
    imag_residual: float


def filter_image(image: np.ndarray, mask: FourierMask) -> FilterOutcome:
    """Mask one image's centered spectrum; returns image + imag residual."""
    spectrum = dft2(image)
    mc, mh, mw = mask.shape
    c, h, w = spectrum.shape
    if (mh, mw) != (h, w) or (mc != c and mc != 1):
        raise DimensionError(f"mask shape {mask.shape} does not fit image {image.shape}")
    filtered, residual = idft2(spectrum * mask.data)
    return FilterOutcome(image=filtered, imag_residual=residual)


def filter_dataset(dataset: LabeledDataset, mask: FourierMask) -> LabeledDataset:
    """Filter every image with the same mask; labels and order untouched.

    Images are processed one by one in dataset order, so the result is
    identical no matter how callers might batch or parallelize upstream.
    """
    out = np.empty_like(dataset.images, dtype=np.float64)
    worst = 0.0
    for i in range(len(dataset)):
        outcome = filter_image(dataset.images[i], mask)
        out[i] = outcome.image
        worst = max(worst, outcome.imag_residual)
    return make_dataset(
        out,
        dataset.labels,
        source=dataset.manifest.source,
        variant=mask.provenance.kind,
        num_classes=dataset.manifest.num_classes,
        mask=mask.provenance,
        preprocessing=dataset.manifest.preprocessing,
        max_imag_residual=worst,
        extra=dataset.manifest.extra,
    )


def build_variants(
    dataset: LabeledDataset, radius: float, drop_prob: float, seed: int
) -> dict[str, LabeledDataset]:
    """The four training distributions: unfiltered, radial, random, augmented.

    The random mask is fully determined by the seed, so calling this with
    the same (radius, drop_prob, seed) on a different split (e.g. the test
    set) applies the exact same masks - which is how one experiment shares
    its masks between train and test.
    """
    if len(dataset) == 0:
        raise DimensionError("cannot build variants of an empty dataset")
    c, h, w = dataset.manifest.shape
    m_radial = radial_mask(h, w, c, radius)
    m_random = random_mask(h, w, c, drop_prob, seed)

    radial_ds = filter_dataset(dataset, m_radial)
    random_ds = filter_dataset(dataset, m_random)
    augmented = make_dataset(
        np.concatenate([dataset.images.astype(np.float64), radial_ds.images, random_ds.images]),
        np.concatenate([dataset.labels] * 3),
        source=dataset.manifest.source,
        variant="augmented",
        num_classes=dataset.manifest.num_classes,
        preprocessing=dataset.manifest.preprocessing,
        max_imag_residual=max(
            radial_ds.manifest.max_imag_residual, random_ds.manifest.max_imag_residual
        ),
        extra={
            **dataset.manifest.extra,
            "radius": float(radius),
            "drop_prob": float(drop_prob),
            "mask_seed": int(seed),
        },
    )
    return {
        "unfiltered": dataset,
        "radial": radial_ds,
        "random": random_ds,
        "augmented": augmented,
    }
