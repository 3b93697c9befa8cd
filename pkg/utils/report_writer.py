import os
import re
import csv
import json
import math
import logging
from typing import Any
from typing import TextIO

from data.models import RunReport


logger = logging.getLogger(__name__)

UNSAFE_FILE_CHARS = re.compile(r"[^A-Za-z0-9_.-]+")


def report_lines(report: RunReport) -> list[str]:
    """Serialize a report as JSON lines, one per record, then the summary.

    Keys are sorted and non-finite floats become strings, so the output is
    valid JSON and identical between runs apart from ``created_at``.

    Args:
        report: Run report.
    """

    lines = [_dump(record.to_dict()) for record in report.records]
    lines.append(_dump(report.summary()))
    return lines


def write_report(report: RunReport, stream: TextIO) -> None:
    """Write the JSON-lines report to an open text stream.

    Args:
        report: Run report.
        stream: Destination stream, usually stdout.
    """

    for line in report_lines(report):
        stream.write(line + "\n")
    stream.flush()


def save_report(report: RunReport, path: str) -> str:
    """Write the JSON-lines report to a file.

    Args:
        report: Run report.
        path: Destination path; parent directories are created.
    """

    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok = True)
    with open(path, "w", encoding = "utf-8", newline = "\n") as fp:
        write_report(report = report, stream = fp)
    logger.info("report written: %s", path)
    return path


def write_profiles(report: RunReport, output_dir: str) -> list[str]:
    """Write one CSV per check with the residual along a line, per level.

    Columns are ``level``, ``x`` and ``residual``.

    Args:
        report: Run report collected with profiles.
        output_dir: Destination directory.
    """

    os.makedirs(output_dir, exist_ok = True)
    written = []
    for name in sorted(report.profiles):
        path = os.path.join(output_dir, f"{UNSAFE_FILE_CHARS.sub('_', name)}.csv")
        with open(path, "w", encoding = "utf-8", newline = "") as fp:
            writer = csv.writer(fp)
            writer.writerow(["level", "x", "residual"])
            for level in sorted(report.profiles[name]):
                xs, values = report.profiles[name][level]
                for x, value in zip(xs, values):
                    writer.writerow([level, repr(float(x)), repr(float(value))])
        written.append(path)
    logger.info("wrote %d residual profiles to %s", len(written), output_dir)
    return written


def _dump(payload: dict) -> str:
    return json.dumps(_finite(payload), sort_keys = True, ensure_ascii = False, allow_nan = False)


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {key: _finite(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(item) for item in value]
    return value
