"""Rendering of pipeline reports as text tables or JSON."""
from __future__ import annotations

import logging

from tabulate import tabulate

from config.constants import REPORT_SCHEMA_VERSION
from config.settings import DEFAULT_OUTPUT_FORMAT, SUPPORTED_OUTPUT_FORMATS
from utils.helpers import dump_json, to_jsonable, write_atomic

logger = logging.getLogger(__name__)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.3e}" if value and (abs(value) < 1e-3 or abs(value) >= 1e4) else f"{value:.6g}"
    if value is None:
        return "-"
    return str(value)


def _flatten(section: dict, prefix: str = "") -> list[tuple[str, str]]:
    rows = []
    for key in sorted(section):
        value = section[key]
        label = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(_flatten(value, prefix=f"{label}."))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            continue
        else:
            rows.append((label, _fmt(value)))
    return rows


class ReportFormatter:
    """Builds the versioned report record and renders it."""

    def __init__(self, output_format: str = DEFAULT_OUTPUT_FORMAT):
        if output_format not in SUPPORTED_OUTPUT_FORMATS:
            raise ValueError(f"Unsupported output format: {output_format}")
        self.output_format = output_format

    @staticmethod
    def build(command: str, algebra: str, verdict: str, exit_code: int, sections: dict,
              config: dict | None = None) -> dict:
        return to_jsonable({
            "schema": REPORT_SCHEMA_VERSION,
            "command": command,
            "algebra": algebra,
            "verdict": verdict,
            "exit_code": exit_code,
            "config": config or {},
            "sections": sections,
        })

    def render(self, report: dict) -> str:
        if self.output_format == "json":
            return dump_json(report)
        return self.render_text(report)

    @staticmethod
    def render_text(report: dict) -> str:
        header = (f"{report['command']} {report['algebra']}: {report['verdict']} "
                  f"(exit {report['exit_code']})")
        out = [header, "=" * len(header)]
        for name in sorted(report.get("sections", {})):
            section = report["sections"][name]
            out.append("")
            out.append(name)
            if isinstance(section, list):
                out.append(tabulate(section, headers="keys", tablefmt="grid"))
            else:
                out.append(tabulate(_flatten(section), headers=["item", "value"], tablefmt="grid"))
        return "\n".join(out)

    def save(self, report: dict, path: str) -> str:
        """Write the rendered report atomically and return the path."""
        write_atomic(path, self.render(report) + "\n")
        return path
