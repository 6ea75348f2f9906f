"""BER records and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

CSV_HEADER = ("receiver", "snr_db", "bits", "bit_errors", "frames", "frame_errors", "ber")


@dataclass(frozen=True)
class BerRecord:
    """Error counts of one receiver at one SNR point."""

    receiver: str
    snr_db: float
    bits: int
    bit_errors: int
    frames: int
    frame_errors: int

    def __post_init__(self):
        if self.bits < 1 or self.frames < 1:
            raise ValueError("bits and frames must be positive")
        if not 0 <= self.bit_errors <= self.bits:
            raise ValueError("bit_errors outside [0, bits]")
        if not 0 <= self.frame_errors <= self.frames:
            raise ValueError("frame_errors outside [0, frames]")
        if self.frame_errors > self.bit_errors or (self.bit_errors and not self.frame_errors):
            raise ValueError("frame and bit error counts are inconsistent")

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits

    def confidence_halfwidth(self, z: float = 1.96) -> float:
        """Half width of the normal-approximation BER confidence interval."""
        p = self.ber
        return z * math.sqrt(max(p * (1 - p), 0.0) / self.bits)


def csv_text(records: Iterable[BerRecord]) -> str:
    rows = sorted(records, key=lambda r: (r.receiver, r.snr_db))
    if not rows:
        raise ValueError("no records to emit")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow((r.receiver, f"{r.snr_db:.10g}", r.bits, r.bit_errors, r.frames, r.frame_errors,
                    f"{r.ber:.6g}"))
    return buf.getvalue()


def emit_csv(records: Iterable[BerRecord], destination: str | Path | TextIO | None = None) -> str:
    """Write records sorted by ``(receiver, snr_db)``; returns the text.

    ``destination`` may be a path, an open text stream or ``None``.
    """
    text = csv_text(records)
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text)
    elif destination is not None:
        destination.write(text)
    return text


def parse_csv(text: str) -> list[BerRecord]:
    """Inverse of :func:`emit_csv` (the ``ber`` column is recomputed)."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected header {reader.fieldnames}")
    return [BerRecord(row["receiver"], float(row["snr_db"]), int(row["bits"]), int(row["bit_errors"]),
                      int(row["frames"]), int(row["frame_errors"])) for row in reader]
