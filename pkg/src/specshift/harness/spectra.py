"""Radially averaged power spectra and log-log power-law fits.

Modes are grouped into integer annuli by rounding their centered distance
from DC to the nearest integer; the DC pixel itself is excluded. Each
annulus reports the mean distance of its members as the bin radius (more
faithful than the integer label for the innermost rings) and the mean
power. Fitting is ordinary least squares of log(power) on log(radius);
with expected power A / |w|**(2 - eta) the slope s gives eta = 2 + s.
"""

from dataclasses import dataclass

import numpy as np

from ..data import LabeledDataset
from ..errors import DimensionError
from ..spectral import centered_frequency_grid, dft2, power_spectrum


@dataclass(frozen=True)
class PowerLawFit:
    amplitude: float  # A
    eta: float  # 2 + log-log slope
    residual: float  # mean squared log-log error over used bins
    bins_used: int
    bins_excluded: int  # zero-power bins dropped before fitting


def radial_profile(power: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(radii, mean power) over integer annuli around the centered DC.

    `power` is one centered (H, W) plane. DC is excluded; annulus k holds
    the modes whose distance rounds to k and reports their mean distance
    as the radius.
    """
    power = np.asarray(power)
    if power.ndim != 2:
        raise DimensionError(f"expected (H, W) power plane, got {power.shape}")
    h, w = power.shape
    dist = centered_frequency_grid(h, w)
    ring = np.rint(dist).astype(int)
    nondc = dist > 0
    radii, means = [], []
    for k in range(1, ring.max() + 1):
        sel = (ring == k) & nondc
        if not sel.any():
            continue
        radii.append(float(dist[sel].mean()))
        means.append(float(power[sel].mean()))
    return np.array(radii), np.array(means)


def fit_power_law(radii: np.ndarray, mean_power: np.ndarray) -> PowerLawFit:
    """Least-squares power law through a radial profile.

    Zero-power bins (e.g. everything beyond a radial mask's cutoff) are
    excluded from the fit and counted in bins_excluded, which flags that
    the fit covers only part of the spectrum.
    """
    radii = np.asarray(radii, dtype=float)
    mean_power = np.asarray(mean_power, dtype=float)
    usable = mean_power > 0
    excluded = int((~usable).sum())
    if usable.sum() < 3:
        raise ValueError(f"need >= 3 nonzero bins to fit, have {int(usable.sum())}")
    x = np.log(radii[usable])
    y = np.log(mean_power[usable])
    design = np.vstack([np.ones_like(x), x]).T
    (intercept, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.mean((y - (intercept + slope * x)) ** 2))
    return PowerLawFit(
        amplitude=float(np.exp(intercept)),
        eta=float(2.0 + slope),
        residual=resid,
        bins_used=int(usable.sum()),
        bins_excluded=excluded,
    )


def mean_power_plane(dataset: LabeledDataset, limit: int | None = None) -> np.ndarray:
    """Mean centered power spectrum over images and channels, shape (H, W)."""
    n = len(dataset) if limit is None else min(limit, len(dataset))
    if n == 0:
        raise ValueError("dataset is empty")
    _, h, w = dataset.manifest.shape
    acc = np.zeros((h, w))
    for i in range(n):
        acc += power_spectrum(dft2(dataset.images[i])).mean(axis=0)
    return acc / n


def dataset_spectrum(
    dataset: LabeledDataset, limit: int | None = None
) -> tuple[np.ndarray, np.ndarray, PowerLawFit]:
    """Radial profile + power-law fit of a dataset's mean spectrum."""
    radii, means = radial_profile(mean_power_plane(dataset, limit))
    return radii, means, fit_power_law(radii, means)
