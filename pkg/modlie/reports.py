# modlie/reports.py
"""
Verification reports

A report is a pydantic model; the text rendering is a pure function of
it so `--json` output and the human summary never disagree.
"""
import time
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from modlie import __version__


class CheckRecord(BaseModel):
    check: str
    element: Optional[str] = None
    index: Optional[int] = None
    expected: Optional[str] = None
    computed: Optional[str] = None
    matched: bool
    coset: bool = False
    note: Optional[str] = None


class Report(BaseModel):
    target: str
    status: Literal["pass", "fail", "conditional-pass"]
    conditional: bool = False
    checks: List[CheckRecord] = Field(default_factory=list)
    timing_seconds: float = 0.0
    tool_version: str = __version__
    input_digests: Dict[str, str] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    @property
    def mismatches(self) -> List[CheckRecord]:
        return [c for c in self.checks if not c.matched]


def _order(record: CheckRecord):
    return (record.index is None, record.index if record.index is not None else 0, record.check, record.element or "")


def build_report(
    target: str,
    checks: List[CheckRecord],
    started: float,
    conditional: bool = False,
    digests: Optional[Dict[str, str]] = None,
    notes: Optional[List[str]] = None,
) -> Report:
    """
    Assemble a report with a deterministic check order

    Args:
        target: What was verified
        checks: Individual results
        started: time.perf_counter() at the start of the run
        conditional: Inputs came from transcribed fixtures
        digests: sha256 of input files
        notes: Free-form remarks

    Returns:
        Report
    """
    ok = all(c.matched for c in checks)
    status = "fail" if not ok else ("conditional-pass" if conditional else "pass")
    return Report(
        target=target,
        status=status,
        conditional=conditional,
        checks=sorted(checks, key=_order),
        timing_seconds=round(time.perf_counter() - started, 3),
        input_digests=dict(digests or {}),
        notes=list(notes or []),
    )


def render_text(report: Report) -> str:
    lines = [f"{report.target}: {report.status.upper()}  ({report.timing_seconds:.2f}s, modlie {report.tool_version})"]
    for c in report.checks:
        mark = "ok " if c.matched else "XX "
        label = c.check if not c.element else f"{c.check} [{c.element}]"
        line = f"  {mark}{label}"
        if not c.matched or c.expected is not None:
            if c.expected is not None:
                line += f"\n       expected: {c.expected}"
            if c.computed is not None:
                line += f"\n       computed: {c.computed}"
        if c.coset:
            line += "  (modulo center)"
        if c.note:
            line += f"\n       note: {c.note}"
        lines.append(line)
    for name, digest in sorted(report.input_digests.items()):
        lines.append(f"  input {name}: sha256 {digest[:16]}")
    for note in report.notes:
        lines.append(f"  note: {note}")
    return "\n".join(lines)
