"""On-demand call graph inside one library, grown from the APIs something else calls."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Collection, Iterable, Mapping

from .._astutil import parse_file
from ..knowledge.inventory import ApiInventory
from .calls import ApiUse, UseEvent, UseVisitor, module_bindings, use_from_event
from .fqn import resolve_name
from .imports import module_of

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CallGraphNode:
    """``<name, caller, location, owner>``; location is None for calls leaving the package."""

    name: str
    caller: str | None
    location: str | None
    owner: str


@dataclass
class CallGraph:
    package: str
    nodes: set[CallGraphNode] = field(default_factory=set)
    boundary: list[tuple[str, ApiUse]] = field(default_factory=list)  # (owning package, use)
    visited: list[str] = field(default_factory=list)  # internal definitions whose bodies were read


class _FileEvents:
    """Per-file use events, computed once and filtered by enclosing definition."""

    def __init__(self, import_root: Path):
        self.root = Path(import_root)
        self._cache: dict[str, list[UseEvent]] = {}

    def events(self, rel_file: str) -> list[UseEvent]:
        if rel_file not in self._cache:
            path = self.root / rel_file
            tree = parse_file(path) if path.is_file() else None
            if tree is None:
                self._cache[rel_file] = []
            else:
                module, is_pkg = module_of(path, self.root)
                visitor = UseVisitor(module, is_pkg, module_bindings(tree, module, is_pkg))
                visitor.visit(tree)
                self._cache[rel_file] = visitor.events
        return self._cache[rel_file]

    def body(self, rel_file: str, fqn: str) -> list[UseEvent]:
        prefix = fqn + "."
        return [e for e in self.events(rel_file) if e.scope == fqn or (e.scope or "").startswith(prefix)]


def _module_file(module: str, root: Path) -> str | None:
    base = root.joinpath(*module.split("."))
    for cand in (base.with_suffix(".py"), base / "__init__.py"):
        if cand.is_file():
            return cand.relative_to(root).as_posix()
    return None


def build_on_demand_call_graph(entry_apis: Iterable[str], import_root: Path, inventory: ApiInventory,
                               simplify: Mapping[str, str], own_names: Collection[str],
                               dep_names: Mapping[str, str], max_depth: int = 10,
                               modules: Collection[str] = ()) -> CallGraph:
    """Follow calls from *entry_apis* through the package's own definitions.

    *own_names* are the package's top-level import names; *dep_names* maps a
    top-level import name to the dependency that owns it.  A call into a
    dependency becomes a boundary node; anything else unresolvable is dropped.
    Entry names that are modules contribute their module-level code.
    """
    root = Path(import_root)
    files = _FileEvents(root)
    graph = CallGraph(inventory.package)
    queue: deque[tuple[str, int]] = deque()
    seen: set[str] = set()
    boundary_seen: set = set()
    for name in sorted(set(entry_apis)):
        fqn = resolve_name(name, inventory.apis, simplify) or (name if name in modules else None)
        if fqn is None:
            log.debug("entry %s not found in %s", name, inventory.package)
            continue
        graph.nodes.add(CallGraphNode(name, None, fqn, inventory.package))
        if fqn not in seen:
            seen.add(fqn)
            queue.append((fqn, 0))
    while queue:
        fqn, depth = queue.popleft()
        graph.visited.append(fqn)
        entry = inventory.apis.get(fqn)
        if entry is not None:
            rel = entry.file
            events = files.body(rel, fqn)
        else:
            rel = _module_file(fqn, root)
            events = [e for e in files.events(rel) if e.scope == fqn] if rel else []
        for event in events:
            top = event.name.split(".", 1)[0]
            if top in own_names:
                target = resolve_name(event.name, inventory.apis, simplify)
                if target is None:
                    continue  # unknown location: dropped
                graph.nodes.add(CallGraphNode(event.name, fqn, target, inventory.package))
                if target not in seen and depth + 1 < max_depth:
                    seen.add(target)
                    queue.append((target, depth + 1))
            elif top in dep_names:
                owner = dep_names[top]
                graph.nodes.add(CallGraphNode(event.name, fqn, None, owner))
                use = use_from_event(event, rel)
                if (use.name, use.site) not in boundary_seen:
                    boundary_seen.add((use.name, use.site))
                    graph.boundary.append((owner, use))
    return graph
