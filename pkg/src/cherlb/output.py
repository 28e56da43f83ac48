"""CSV output with an embedded run manifest.

Header lines start with '#' and carry the manifest (command, parameters,
seed, version, timestamps).  Data rows depend only on the computation, so
identical inputs give byte-identical rows.
"""

from dataclasses import dataclass, field
from datetime import datetime, timezone
import csv
import io
import math


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int = 0
    tool_version: str = ""
    started: str = field(default_factory=lambda: _now())
    finished: str = ""

    def finish(self):
        self.finished = _now()
        return self

    def header_lines(self):
        lines = [
            f"command={self.command}",
            f"seed={self.seed}",
            f"tool_version={self.tool_version}",
            f"started={self.started}",
            f"finished={self.finished}",
        ]
        lines += [f"param.{k}={v}" for k, v in sorted(self.parameters.items())]
        return ["# " + line for line in lines]


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def fmt(value):
    """12 significant digits in scientific notation; ints and strings verbatim."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.11e}"
    return str(value)


def render(columns, rows, manifest=None):
    buf = io.StringIO()
    if manifest is not None:
        for line in manifest.header_lines():
            buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for _, v in _items(columns, row)])
    return buf.getvalue()


def _items(columns, row):
    if isinstance(row, dict):
        return [(c, row[c]) for c in columns]
    return list(zip(columns, row))


def write_csv(path, columns, rows, manifest=None):
    text = render(columns, rows, manifest)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text


def data_rows(text):
    """The non-comment lines of a rendered CSV (for determinism checks)."""
    return [line for line in text.splitlines() if not line.startswith("#")]


def read_csv(path):
    """Parse a CSV written by ``write_csv`` into (manifest dict, list of row dicts)."""
    meta, body = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
            else:
                body.append(line)
    return meta, list(csv.DictReader(body))
