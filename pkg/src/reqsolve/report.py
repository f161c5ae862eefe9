"""The inference report: an ordered event log plus the final verdict."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .versioning import Version, render_requirements

SCHEMA_VERSION = 1

COMPATIBLE = "compatible"
FALLBACK = "fallback"
ERROR = "error"


def _plain(value: Any) -> Any:
    """JSON-friendly copy: versions become strings, tuples lists, mappings sorted dicts."""
    if isinstance(value, Version):
        return str(value)
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(_plain(v) for v in value)
    if hasattr(value, "to_json"):
        return value.to_json()
    return value


@dataclass
class InferenceReport:
    target: str = ""
    from_version: str = ""
    to_version: str = ""
    start: dict[str, Version] = field(default_factory=dict)
    events: list[dict[str, Any]] = field(default_factory=list)
    final: dict[str, Version] | None = None
    verdict: str = ERROR
    exit_code: int = 1
    reason: str = ""
    open_issues: list[Any] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    iterations: int = 0
    elapsed: float = 0.0  # text report only; keeps report.json reproducible

    def log(self, event: str, **data: Any) -> None:
        """Append an event.  ``step`` is a logical clock, not wall time."""
        entry = {"step": len(self.events) + 1, "event": event}
        entry.update({k: _plain(v) for k, v in data.items()})
        self.events.append(entry)

    def note(self, text: str) -> None:
        if text not in self.notes:
            self.notes.append(text)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "target": {"name": self.target, "from": self.from_version, "to": self.to_version},
            "start_requirements": _plain(self.start),
            "final_requirements": _plain(self.final) if self.final is not None else None,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "reason": self.reason,
            "iterations": self.iterations,
            "open_issues": _plain(self.open_issues),
            "notes": list(self.notes),
            "events": self.events,
        }

    def render_json(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def render_text(self) -> str:
        lines = [
            f"upgrade {self.target} {self.from_version} -> {self.to_version}",
            f"verdict: {self.verdict} (exit {self.exit_code}) after {self.iterations} iteration(s), "
            f"{self.elapsed:.2f}s",
        ]
        if self.reason:
            lines.append(f"reason: {self.reason}")
        lines.append("")
        for ev in self.events:
            lines.append(_event_line(ev))
        if self.open_issues:
            lines.append("")
            lines.append("unresolved issues:")
            for issue in self.open_issues:
                lines.append(f"  {_issue_line(_plain(issue))}")
        if self.notes:
            lines.append("")
            lines.append("notes:")
            lines.extend(f"  {n}" for n in self.notes)
        lines.append("")
        lines.append("requirements:")
        final = self.final if self.final is not None else {}
        lines.extend("  " + line for line in render_requirements(final).splitlines())
        return "\n".join(lines) + "\n"


def _issue_line(issue: Mapping[str, Any]) -> str:
    site = issue.get("site")
    where = f" at {site[0]}:{site[1]}" if site else ""
    return (f"[{issue['level']} {issue['kind']}] {issue['package']} {issue['from_version']}->"
            f"{issue['to_version']}: {issue['entity']}{where}")


def _event_line(ev: Mapping[str, Any]) -> str:
    kind = ev["event"]
    head = f"{ev['step']:>3} {kind:<10}"
    if kind == "solve":
        if ev.get("assignment") is not None:
            pins = ", ".join(f"{k}=={v}" for k, v in sorted(ev["assignment"].items()))
            return f"{head} iteration {ev['iteration']}: {pins}"
        return f"{head} iteration {ev['iteration']}: unsatisfiable ({ev.get('detail', '')})"
    if kind == "changes":
        return f"{head} " + (", ".join(ev["triples"]) or "none")
    if kind == "usage":
        return f"{head} {ev['package']}: {ev['apis']} API(s), {ev['modules']} module(s) over {ev['chains']} chain(s)"
    if kind == "issues":
        if not ev["issues"]:
            return f"{head} none"
        return f"{head} " + "; ".join(_issue_line(i) for i in ev["issues"])
    if kind == "plan":
        return f"{head} {ev['rationale']} on {ev['subject']}: {', '.join(ev['candidates'])}"
    if kind == "try":
        return f"{head} {ev['subject']}=={ev['version']}"
    rest = ", ".join(f"{k}={v}" for k, v in ev.items() if k not in ("step", "event"))
    return f"{head} {rest}".rstrip()
