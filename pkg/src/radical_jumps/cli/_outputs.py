# mypy: disallow-untyped-defs
"""
Result files: fixed-schema CSV tables, optional gnuplot scripts and the JSON run manifest.
"""
from typing import Any
from typing import Optional

import attr
import csv
import importlib.metadata
import json
import logging
import math
import numpy as np
import os
import tempfile
import time
from collections.abc import Iterator
from collections.abc import Sequence
from contextlib import contextmanager
from pathlib import Path

log = logging.getLogger(__name__)

DISTRIBUTION_NAME = "radical-jumps"
MANIFEST_NAME = "manifest.json"
CSV_FORMAT = ".15g"


def CodeVersion() -> str:
    try:
        return importlib.metadata.version(DISTRIBUTION_NAME)
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


def FormatValue(value: Any) -> str:
    """
    CSV text of a cell: integers as they are, floats with 15 significant digits.
    """
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, CSV_FORMAT)


class OutputWriter:
    """
    Writes the tables of one run into ``directory``, remembering every artifact.

    ``formats`` always contains ``csv``; with ``gnuplot`` each table also gets a ``.gp``
    script plotting its columns against the first one.
    """

    def __init__(self, directory: os.PathLike | str, formats: Sequence[str]) -> None:
        self.directory = Path(directory)
        self.formats = tuple(formats)
        self.artifacts: list[str] = []

    def WriteTable(
        self, name: str, header: Sequence[str], columns: Sequence[Sequence[Any]]
    ) -> Path:
        """
        Writes ``columns`` (one sequence per header entry, all of equal length) to
        ``<name>.csv``.
        """
        if len(header) != len(columns):
            raise ValueError(f"{len(header)} header entries for {len(columns)} columns.")
        lengths = {len(c) for c in columns}
        if len(lengths) > 1:
            raise ValueError(f"Columns of {name} have different lengths: {sorted(lengths)}.")
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as stream:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(header)
            for row in zip(*columns):
                writer.writerow([FormatValue(v) for v in row])
        self._Record(path)
        if "gnuplot" in self.formats:
            self._Record(WriteGnuplotScript(path, header))
        return path

    def _Record(self, path: Path) -> None:
        self.artifacts.append(path.name)
        log.info("Wrote %s", path)


def WriteGnuplotScript(csv_path: Path, header: Sequence[str]) -> Path:
    """
    Writes ``<csv stem>.gp`` next to ``csv_path``: every column against the first, with
    ``*_stderr`` columns drawn as error bars of the column before them.
    """
    lines = [
        f"# gnuplot script for {csv_path.name}",
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set xlabel '{header[0]}'",
        "set terminal pngcairo size 900,600",
        f"set output '{csv_path.stem}.png'",
    ]
    plots = []
    for index, name in enumerate(header[1:], start=2):
        if name.endswith("_stderr"):
            continue
        if index < len(header) and header[index] == f"{name}_stderr":
            plots.append(f"'{csv_path.name}' using 1:{index}:{index + 1} with yerrorlines")
        else:
            plots.append(f"'{csv_path.name}' using 1:{index} with lines")
    lines.append("plot " + ", \\\n     ".join(plots))
    path = csv_path.with_suffix(".gp")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@attr.s(auto_attribs=True)
class Timings:
    wall_seconds: float = 0.0
    cpu_seconds: float = 0.0


@contextmanager
def Measure() -> Iterator[Timings]:
    """
    Measures wall-clock and CPU time (of this process) spent inside the ``with`` block.
    """
    timings = Timings()
    wall, cpu = time.perf_counter(), time.process_time()
    try:
        yield timings
    finally:
        timings.wall_seconds = time.perf_counter() - wall
        timings.cpu_seconds = time.process_time() - cpu


@attr.s(auto_attribs=True, frozen=True)
class RunManifest:
    """
    Provenance of one command: the resolved configuration, what was produced, and how long it
    took. Feeding the manifest back as a configuration repeats the run.
    """

    command: str
    config: dict[str, Any]
    master_seed: int
    dim: int
    nucleus_count: int
    timings: Timings
    artifacts: tuple[str, ...]
    results: dict[str, Any] = attr.ib(factory=dict)
    version: str = attr.ib(factory=CodeVersion)

    def ToDict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "version": self.version,
            "master_seed": self.master_seed,
            "dim": self.dim,
            "nucleus_count": self.nucleus_count,
            "wall_seconds": self.timings.wall_seconds,
            "cpu_seconds": self.timings.cpu_seconds,
            "artifacts": list(self.artifacts),
            "results": self.results,
            "config": self.config,
        }


def WriteManifest(
    directory: os.PathLike | str, manifest: RunManifest, name: Optional[str] = None
) -> Path:
    """
    Writes the manifest atomically: readers see either the previous file or the complete new
    one.
    """
    target = Path(directory) / (name or MANIFEST_NAME)
    target.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(manifest.ToDict(), indent=2, sort_keys=True, allow_nan=True) + "\n"
    fd, temp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as stream:
            stream.write(text)
        os.replace(temp_name, target)
    except BaseException:
        Path(temp_name).unlink(missing_ok=True)
        raise
    log.info("Wrote %s", target)
    return target
