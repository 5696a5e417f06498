"""Centered unitary 2D DFT over (C, H, W) image tensors.

Conventions used package-wide:

* An image is a real array of shape (C, H, W) with even H and W.
* A spectrum is a complex array of the same shape in *centered*
  coordinates: the DC component sits at index (H//2, W//2). Centering
  moves standard index k to (k + H//2) % H on each spatial axis.
* The transform is unitary (1/sqrt(HW) on both directions), so energy is
  preserved: sum(x**2) == sum(|dft2(x)|**2).

All arithmetic is done in double precision regardless of input dtype.
"""

import numpy as np

from .errors import DimensionError, NumericalError


def _check_image_shape(shape: tuple) -> None:
    if len(shape) != 3:
        raise DimensionError(f"expected (C, H, W) array, got shape {shape}")
    c, h, w = shape
    if c < 1:
        raise DimensionError(f"channel count must be >= 1, got {c}")
    if h % 2 != 0 or w % 2 != 0:
        raise DimensionError(f"height and width must be even, got {h}x{w}")


def validate_image(image: np.ndarray) -> np.ndarray:
    """Check (C, H, W) shape, even dims, finiteness; return as float64."""
    image = np.asarray(image)
    _check_image_shape(image.shape)
    if np.iscomplexobj(image):
        raise DimensionError("image must be real-valued")
    if not np.all(np.isfinite(image)):
        raise NumericalError("image contains non-finite values")
    return image.astype(np.float64, copy=False)


def dft2(image: np.ndarray) -> np.ndarray:
    """Unitary per-channel 2D DFT, shifted so DC is at (H//2, W//2)."""
    image = validate_image(image)
    spectrum = np.fft.fft2(image, axes=(-2, -1), norm="ortho")
    return np.fft.fftshift(spectrum, axes=(-2, -1))


def idft2(spectrum: np.ndarray) -> tuple[np.ndarray, float]:
    """Inverse of :func:`dft2`.

    Returns ``(image, max_imag_residual)`` where the image is the real
    part of the inverse transform and the residual is the largest
    absolute imaginary component that was discarded. The residual is ~0
    for conjugate-symmetric spectra (e.g. after radial masking) and is
    genuinely nonzero after random masking; callers decide whether to
    care, it is never silently dropped.
    """
    spectrum = np.asarray(spectrum)
    _check_image_shape(spectrum.shape)
    unshifted = np.fft.ifftshift(spectrum, axes=(-2, -1))
    out = np.fft.ifft2(unshifted, axes=(-2, -1), norm="ortho")
    residual = float(np.max(np.abs(out.imag))) if out.size else 0.0
    return out.real, residual


def power_spectrum(spectrum: np.ndarray) -> np.ndarray:
    """Elementwise squared magnitude |S|^2 of a centered spectrum."""
    spectrum = np.asarray(spectrum)
    _check_image_shape(spectrum.shape)
    return np.abs(spectrum) ** 2


def centered_frequency_grid(height: int, width: int) -> np.ndarray:
    """Distance of every centered index from DC, shape (H, W).

    Entry (i, j) is the l2 norm of the frequency vector at that index,
    i.e. hypot(i - H//2, j - W//2).
    """
    if height % 2 != 0 or width % 2 != 0:
        raise DimensionError(f"height and width must be even, got {height}x{width}")
    rows = np.arange(height) - height // 2
    cols = np.arange(width) - width // 2
    return np.hypot(rows[:, None], cols[None, :])
