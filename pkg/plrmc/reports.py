"""Report assembly for the command-line surface

Reports are plain dicts with a ``command`` and the resolved ``config``; JSON
rendering sorts keys so identical runs produce identical bytes.
"""

from fractions import Fraction
from typing import Any, Dict, Iterable, List
import json

import click

BANNER_WIDTH = 50


def make_report(command: str, config: Dict[str, Any], **sections: Any) -> Dict[str, Any]:
    report = {"command": command, "config": config}
    report.update(sections)
    return report


def _default(value: Any):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def to_json_text(report: Dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False, default=_default)


def banner(title: str) -> List[str]:
    return ["", "=" * BANNER_WIDTH, title, "=" * BANNER_WIDTH]


def status(passed: bool, ok: str = "PASS", bad: str = "FAIL") -> str:
    return click.style(ok, fg="green") if passed else click.style(bad, fg="red")


def key_values(pairs: Iterable[tuple], indent: int = 0) -> List[str]:
    pad = " " * indent
    return [f"{pad}{key}: {value}" for key, value in pairs]


def config_lines(config: Dict[str, Any]) -> List[str]:
    shown = [(k, v) for k, v in config.items() if v not in (None, [], "") and k != "output"]
    return banner("CONFIG") + key_values(shown)


def emit(report: Dict[str, Any], output: str, text_lines: Iterable[str]):
    """Write the report to stdout as JSON or as the given text lines"""
    if output == "json":
        click.echo(to_json_text(report))
        return
    for line in text_lines:
        click.echo(line)
