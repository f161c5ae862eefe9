"""Import closure of library files and the library names those imports pull in."""

from __future__ import annotations

import ast
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .._astutil import parse_file, resolve_relative
from .calls import Site, matches


@dataclass(frozen=True, order=True)
class RawImport:
    """A dotted name exactly as written in an import statement."""

    name: str
    site: Site
    star: bool = False


def module_of(path: Path, library_root: Path) -> tuple[str, bool]:
    """Dotted module name of a file under *library_root* and whether it is a package init."""
    rel = path.resolve().relative_to(library_root.resolve())
    parts = list(rel.with_suffix("").parts)
    if parts[-1] == "__init__":
        return ".".join(parts[:-1]), True
    return ".".join(parts), False


def module_file(module: str, library_root: Path) -> Path | None:
    """``a/b/c.py`` or ``a/b/c/__init__.py`` for ``a.b.c``, if it exists."""
    base = library_root.joinpath(*module.split("."))
    for candidate in (base.with_suffix(".py"), base / "__init__.py"):
        if candidate.is_file():
            return candidate.resolve()
    return None


def module_files_with_parents(module: str, library_root: Path) -> list[Path]:
    """The module's file preceded by every enclosing package init (import executes them all)."""
    parts = module.split(".")
    out = []
    for i in range(1, len(parts) + 1):
        f = module_file(".".join(parts[:i]), library_root)
        if f is not None:
            out.append(f)
    return out


def imported_modules(tree: ast.Module, module: str, is_package: bool) -> list[str]:
    """Modules an import statement may load: ``import m`` gives m; ``from m import n`` gives m and m.n."""
    out = []
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            out.extend(alias.name for alias in node.names)
        elif isinstance(node, ast.ImportFrom):
            base = resolve_relative(module, is_package, node.level, node.module)
            if not base:
                continue
            out.append(base)
            out.extend(f"{base}.{alias.name}" for alias in node.names if alias.name != "*")
    return out


def entry_files_for(name: str, library_root: Path) -> list[Path]:
    """Files an API path touches: every dotted prefix that is a module."""
    return module_files_with_parents(name, library_root)


def find_related_files(entry_files: Iterable[Path], library_root: Path) -> set[Path]:
    """Worklist closure over import statements, restricted to files under *library_root*."""
    library_root = Path(library_root)
    visited: set[Path] = set()
    queue: deque[Path] = deque()
    for f in entry_files:
        abs_path = Path(f).resolve()
        if abs_path not in visited and abs_path.is_file():
            visited.add(abs_path)
            queue.append(abs_path)
    while queue:
        current = queue.popleft()
        tree = parse_file(current)
        if tree is None:
            continue
        module, is_pkg = module_of(current, library_root)
        for imported in imported_modules(tree, module, is_pkg):
            for path in module_files_with_parents(imported, library_root):
                if path not in visited:
                    visited.add(path)
                    queue.append(path)
    return visited


def extract_import_apis(files: Iterable[Path], targets: Iterable[str],
                        root: Path | None = None) -> set[RawImport]:
    """Names brought in by import statements whose dotted path starts with a target name.

    Names are kept as written (no fully-qualified normalization).  A star
    import yields the imported module itself with ``star=True``.
    """
    targets = list(targets)
    out: set[RawImport] = set()
    for path in files:
        path = Path(path)
        tree = parse_file(path)
        if tree is None:
            continue
        if root is not None:
            try:
                rel = path.resolve().relative_to(Path(root).resolve()).as_posix()
                module, is_pkg = module_of(path, Path(root))
            except ValueError:
                rel, module, is_pkg = path.as_posix(), "", False
        else:
            rel, module, is_pkg = path.as_posix(), "", False
        for node in ast.walk(tree):  # breadth-first
            if isinstance(node, ast.Import):
                for alias in node.names:
                    if matches(alias.name, targets):
                        out.add(RawImport(alias.name, (rel, node.lineno)))
            elif isinstance(node, ast.ImportFrom):
                base = resolve_relative(module, is_pkg, node.level, node.module) if module else (
                    node.module if node.level == 0 else None)
                if not base or not matches(base, targets):
                    continue
                for alias in node.names:
                    if alias.name == "*":
                        out.add(RawImport(base, (rel, node.lineno), True))
                    else:
                        out.add(RawImport(f"{base}.{alias.name}", (rel, node.lineno)))
    return out


def derive_import_modules(raw_names: Iterable[str]) -> set[str]:
    """Every dotted prefix of at least two segments, plus the full name itself."""
    out: set[str] = set()
    for name in raw_names:
        parts = name.split(".")
        out.add(name)
        for i in range(2, len(parts)):
            out.add(".".join(parts[:i]))
    return out
