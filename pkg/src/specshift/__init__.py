"""Fourier-filtered dataset variants and generalization-gap experiments.

The package builds low-pass (radial) and random spectral-mask variants of
image datasets, trains small convolutional classifiers on each variant,
and measures how far test error moves across variants - the instrument
for detecting classifiers that key on frequency-domain image statistics
rather than content.
"""

__version__ = "0.1.0"

from .data import (
    DatasetManifest,
    LabeledDataset,
    PixelStats,
    PowerLawSpec,
    augment_batch,
    gcn_stats,
    load_cifar10,
    load_variant,
    make_dataset,
    preprocess,
    save_variant,
    subset_balanced,
    synth_powerlaw,
    synth_twoclass,
)
from .filtering import FilterOutcome, build_variants, filter_dataset, filter_image
from .masks import (
    FourierMask,
    MaskProvenance,
    keep_fraction,
    mask_from_provenance,
    radial_mask,
    random_mask,
)
from .spectral import centered_frequency_grid, dft2, idft2, power_spectrum
