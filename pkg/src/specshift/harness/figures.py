"""Figure rendering for reports, training histories, and spectra.

Every figure lands next to the delimited output it illustrates: the gap
table gets an annotated error-matrix image, each training row gets its
loss/error curves, and spectra get the log-log profile with the fitted
power law overlaid.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import GapReport, TEST_VARIANTS
from .spectra import PowerLawFit


def save_gap_figure(report: GapReport, path, title: str = "") -> None:
    columns = [v for v in TEST_VARIANTS if v in report.rows[0].errors]
    rows = [r.train_variant for r in report.rows]
    cells = np.array(
        [[r.errors[c] for c in columns] + [r.gap] for r in report.rows]
    )
    fig, ax = plt.subplots(figsize=(1.6 * (len(columns) + 1) + 2, 0.7 * len(rows) + 1.6))
    shown = cells * 100.0
    im = ax.imshow(shown[:, : len(columns)], cmap="viridis", aspect="auto")
    for i in range(len(rows)):
        for j in range(len(columns)):
            ax.text(j, i, f"{shown[i, j]:.2f}%", ha="center", va="center", color="white")
        ax.text(len(columns), i, f"{shown[i, -1]:.2f}%", ha="center", va="center")
    ax.set_xticks(range(len(columns) + 1), list(columns) + ["gap"])
    ax.set_yticks(range(len(rows)), rows)
    ax.set_xlabel("test variant")
    ax.set_ylabel("train variant")
    ax.set_xlim(-0.5, len(columns) + 0.5)
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="test error (%)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_history_figure(history: list, path, title: str = "") -> None:
    epochs = [h["epoch"] for h in history]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    ax1.plot(epochs, [h["loss"] for h in history])
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("training loss")
    for name in history[0]["errors"]:
        ax2.plot(epochs, [100.0 * h["errors"][name] for h in history], label=name)
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("test error (%)")
    ax2.legend()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_spectra_figure(
    profiles: dict[str, tuple], path, fits: dict[str, PowerLawFit] | None = None
) -> None:
    """profiles maps a label to (radii, mean power); fits overlay the model."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for label, (radii, means) in profiles.items():
        nz = np.asarray(means) > 0
        ax.loglog(np.asarray(radii)[nz], np.asarray(means)[nz], "o", ms=3, label=label)
        if fits and label in fits:
            fit = fits[label]
            rr = np.asarray(radii)[nz]
            ax.loglog(
                rr,
                fit.amplitude * rr ** (fit.eta - 2.0),
                "--",
                lw=1,
                label=f"{label} fit (A={fit.amplitude:.3g}, eta={fit.eta:.2f})",
            )
    ax.set_xlabel("|w| (centered frequency radius)")
    ax.set_ylabel("mean mode power")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
