"""Generalization-gap reports and portable-pixmap exports.

A report is the train-variant x test-variant error matrix plus one gap
per row (max error - min error across that row's test columns). Three
emission formats share the same cell values: csv and markdown mirror the
table layout, json is the lossless machine form. Floats are printed with
repr-shortest precision, so csv -> markdown -> parse preserves values
exactly.

Wall-clock metadata is tracked in memory and in a separate timings file
but deliberately left out of every emitted report so that reruns of the
same config produce byte-identical report files.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import LabeledDataset
from ..errors import DataFormatError, DimensionError
from ..masks import FourierMask

TEST_VARIANTS = ("unfiltered", "radial", "random")
TRAIN_VARIANTS = ("unfiltered", "radial", "random", "augmented")


def gap_of_row(errors) -> float:
    """max - min over one row's per-test-variant errors."""
    errors = list(errors)
    if len(errors) < 2:
        raise ValueError(f"need >= 2 test-set errors for a gap, got {len(errors)}")
    return max(errors) - min(errors)


@dataclass
class GapRow:
    train_variant: str
    errors: dict  # test variant -> error rate in [0, 1]

    @property
    def gap(self) -> float:
        return gap_of_row(self.errors.values())


@dataclass
class GapReport:
    rows: list  # of GapRow, in run order
    metadata: dict = field(default_factory=dict)

    def row(self, train_variant: str) -> GapRow:
        for r in self.rows:
            if r.train_variant == train_variant:
                return r
        raise KeyError(train_variant)


def _fmt(x: float) -> str:
    return repr(float(x))


def emit_report(report: GapReport, format: str = "csv") -> str:
    """Render a report; format is 'csv', 'markdown', or 'json'."""
    if not report.rows:
        raise ValueError("report has no rows")
    columns = [v for v in TEST_VARIANTS if v in report.rows[0].errors]
    if format == "csv":
        lines = ["train," + ",".join(columns) + ",gap"]
        for r in report.rows:
            cells = [_fmt(r.errors[c]) for c in columns]
            lines.append(",".join([r.train_variant] + cells + [_fmt(r.gap)]))
        return "\n".join(lines) + "\n"
    if format == "markdown":
        head = ["train"] + list(columns) + ["gap"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for r in report.rows:
            cells = [_fmt(r.errors[c]) for c in columns]
            lines.append("| " + " | ".join([r.train_variant] + cells + [_fmt(r.gap)]) + " |")
        return "\n".join(lines) + "\n"
    if format == "json":
        meta = {k: v for k, v in report.metadata.items() if k != "wall_clock"}
        payload = {
            "rows": [
                {"train": r.train_variant, "errors": r.errors, "gap": r.gap}
                for r in report.rows
            ],
            "metadata": meta,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def parse_report(text: str, format: str = "csv") -> GapReport:
    """Inverse of emit_report (metadata only survives the json form)."""
    if format == "json":
        payload = json.loads(text)
        rows = [GapRow(r["train"], dict(r["errors"])) for r in payload["rows"]]
        return GapReport(rows=rows, metadata=payload.get("metadata", {}))

    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if format == "csv":
        header = lines[0].split(",")
        body = [ln.split(",") for ln in lines[1:]]
    elif format == "markdown":
        header = [c.strip() for c in lines[0].strip("|").split("|")]
        body = [
            [c.strip() for c in ln.strip("|").split("|")]
            for ln in lines[2:]  # skip the separator row
        ]
    else:
        raise ValueError(f"unknown report format {format!r}")
    columns = header[1:-1]
    rows = []
    for cells in body:
        errors = {c: float(v) for c, v in zip(columns, cells[1:-1])}
        row = GapRow(cells[0], errors)
        if abs(row.gap - float(cells[-1])) > 1e-12:
            raise DataFormatError(
                f"row {cells[0]}: gap column {cells[-1]} inconsistent with errors"
            )
        rows.append(row)
    return GapReport(rows=rows)


# ---------------------------------------------------------------------------
# Portable pixmap export (display only; stored tensors are never clipped)
# ---------------------------------------------------------------------------


def _to_bytes(plane: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(plane), 0, 255).astype(np.uint8)


def write_pnm(image: np.ndarray, path) -> None:
    """Write one (C, H, W) image as P5 (C=1) or P6 (C=3), clipped to [0, 255]."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[0] not in (1, 3):
        raise DimensionError(f"can only export 1- or 3-channel images, got {image.shape}")
    c, h, w = image.shape
    data = _to_bytes(image)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if c == 1:
        path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + data[0].tobytes())
    else:
        path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + data.transpose(1, 2, 0).tobytes())


def read_pnm(path) -> np.ndarray:
    """Read back a P5/P6 file as (C, H, W) uint8."""
    raw = Path(path).read_bytes()
    fields = raw.split(maxsplit=4)
    magic, w, h, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    if magic not in (b"P5", b"P6") or maxval != 255:
        raise DataFormatError(f"{path}: unsupported pnm header")
    pixels = np.frombuffer(fields[4], dtype=np.uint8)
    if magic == b"P5":
        return pixels[: h * w].reshape(1, h, w).copy()
    return pixels[: h * w * 3].reshape(h, w, 3).transpose(2, 0, 1).copy()


def export_images(dataset: LabeledDataset, indices, out_dir) -> list:
    """Write the chosen images as pnm files; returns the paths written."""
    out_dir = Path(out_dir)
    paths = []
    for i in indices:
        if not 0 <= i < len(dataset):
            raise IndexError(f"index {i} out of range for dataset of {len(dataset)}")
        path = out_dir / f"{dataset.variant}_{i:05d}.pnm"
        write_pnm(dataset.images[i], path)
        paths.append(path)
    return paths


def export_mask(mask: FourierMask, path) -> None:
    """Mask bitmap, white = kept. Identical channels collapse to one plane."""
    data = mask.data
    if all(np.array_equal(data[0], data[c]) for c in range(1, len(data))):
        write_pnm(data[:1] * 255, path)
    elif len(data) == 3:
        write_pnm(data * 255, path)
    else:
        raise DimensionError(f"cannot render {len(data)}-channel mask as a bitmap")
