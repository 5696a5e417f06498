from .experiment import ExperimentConfig, run_experiment
from .figures import save_gap_figure, save_history_figure, save_spectra_figure
from .report import (
    TEST_VARIANTS,
    TRAIN_VARIANTS,
    GapReport,
    GapRow,
    emit_report,
    export_images,
    export_mask,
    gap_of_row,
    parse_report,
    read_pnm,
    write_pnm,
)
from .spectra import (
    PowerLawFit,
    dataset_spectrum,
    fit_power_law,
    mean_power_plane,
    radial_profile,
)

__all__ = [
    "ExperimentConfig",
    "GapReport",
    "GapRow",
    "PowerLawFit",
    "TEST_VARIANTS",
    "TRAIN_VARIANTS",
    "dataset_spectrum",
    "emit_report",
    "export_images",
    "export_mask",
    "fit_power_law",
    "gap_of_row",
    "mean_power_plane",
    "parse_report",
    "radial_profile",
    "read_pnm",
    "run_experiment",
    "save_gap_figure",
    "save_history_figure",
    "save_spectra_figure",
    "write_pnm",
]
