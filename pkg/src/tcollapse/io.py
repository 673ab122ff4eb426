"""
Output files: CSV tables at 17 significant digits, gnuplot ``.dat``
companions and the run manifest (config echo, versions, wall time and a
sha256 for every file written).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(v) -> str:
    """Numbers at 17 significant digits (round-trip exact); other values as text."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def dat_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Whitespace-separated columns with a ``#`` header line, as gnuplot reads them."""
    lines = ["# " + " ".join(header)]
    for row in rows:
        lines.append(" ".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


class OutputDir:
    """Single writer for one command's outputs; remembers every file for the manifest."""

    def __init__(self, root, plot_data: bool = False):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.plot_data = plot_data
        self.files = []

    def path(self, name: str) -> Path:
        return self.root / name

    def write_text(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_bytes(text.encode("utf-8"))
        self.files.append(name)
        return p

    def write_table(self, name: str, header: Sequence[str], rows) -> Path:
        """``name.csv``, plus ``name.dat`` when plot-ready data was requested."""
        rows = [list(r) for r in rows]
        p = self.write_text(f"{name}.csv", csv_text(header, rows))
        if self.plot_data:
            self.write_text(f"{name}.dat", dat_text(header, rows))
        return p

    def register(self, name: str) -> None:
        """Record a file written by someone else (a figure)."""
        self.files.append(name)

    def manifest(self, command: str, config_path: str, raw_config: dict, seed: int,
                 wall_time: float, status: int, extra: dict = None) -> Path:
        entries = [{"file": name, "sha256": sha256_file(self.path(name))}
                   for name in sorted(set(self.files))]
        doc = {
            "command": command,
            "config": str(config_path),
            "config_echo": raw_config,
            "seed": seed,
            "exit_status": status,
            "wall_time_s": wall_time,
            "versions": versions(),
            "outputs": entries,
        }
        if extra:
            doc.update(extra)
        p = self.path("manifest.json")
        p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return p


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def versions() -> dict:
    import matplotlib

    from tcollapse import __version__
    return {"tcollapse": __version__, "python": sys.version.split()[0],
            "numpy": np.__version__, "matplotlib": matplotlib.__version__,
            "platform": platform.platform()}
