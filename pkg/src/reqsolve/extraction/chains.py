"""Dependency paths from the project to a library, and version-change triples."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from ..versioning import Version

PROJECT = "project"


@dataclass(frozen=True)
class ChangeTriple:
    package: str
    from_version: Version | None
    to_version: Version

    def __str__(self) -> str:
        return f"<{self.package}, {self.from_version or '-'}, {self.to_version}>"


def diff_assignments(start: Mapping[str, Version], solved: Mapping[str, Version]) -> list[ChangeTriple]:
    """One triple per package whose version changed or that is newly introduced."""
    out = []
    for pkg, version in solved.items():
        before = start.get(pkg)
        if before != version:
            out.append(ChangeTriple(pkg, before, version))
    return out


def find_call_chains(graph: Mapping[str, Iterable[str]], target: str,
                     project: str = PROJECT) -> set[tuple[str, ...]]:
    """All simple paths ``project -> ... -> target`` (breadth-first).

    A path ends as soon as it reaches *target*; nodes never repeat within a path.
    """
    chains: set[tuple[str, ...]] = set()
    queue = deque([(project,)])
    while queue:
        path = queue.popleft()
        for dep in graph.get(path[-1], ()):
            if dep in path:
                continue
            new = path + (dep,)
            if dep == target:
                chains.add(new)
            else:
                queue.append(new)
    return chains


def dependency_graph(start: Iterable[str], assignment: Mapping[str, Version], deps) -> dict[str, list[str]]:
    """Project -> requirement packages, package -> its dependencies under *assignment*.

    *deps* is ``(pkg, version) -> [(dep, spec), ...]``.
    """
    graph: dict[str, list[str]] = {PROJECT: sorted(p for p in start if p in assignment)}
    for pkg, version in assignment.items():
        graph[pkg] = sorted({d for d, _ in deps(pkg, version) if d in assignment})
    return graph
