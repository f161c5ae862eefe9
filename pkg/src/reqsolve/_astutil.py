"""Small helpers shared by the inventory builder and the usage extractors."""

from __future__ import annotations

import ast
import logging
import os
from pathlib import Path
from typing import Iterator

log = logging.getLogger(__name__)

EXCLUDED_DIRS = frozenset({"__pycache__", "test", "tests", "doc", "docs", "build", "dist"})
SOURCE_SUFFIXES = (".py", ".pyi")
# top-level build scripts that are never importable modules of the package
_ROOT_SCRIPTS = frozenset({"setup", "conftest"})


def import_root(source_root: Path) -> Path:
    """Directory whose children are the importable top-level names (src-layout aware)."""
    src = source_root / "src"
    if src.is_dir() and any(p.suffix == ".py" or (p / "__init__.py").exists() for p in src.iterdir()):
        return src
    return source_root


def _excluded(dirname: str) -> bool:
    return dirname in EXCLUDED_DIRS or dirname.startswith(".") or not dirname.isidentifier()


def iter_source_files(root: Path) -> Iterator[tuple[Path, str, bool]]:
    """Yield ``(path, dotted_module, is_package_init)`` for every source file.

    Only top-level modules and files inside package directories count.  Walk order is sorted so every consumer sees files deterministically.
    """
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if not _excluded(d))
        rel = Path(dirpath).relative_to(root)
        prefix = list(rel.parts)
        if prefix and not ({"__init__.py", "__init__.pyi"} & set(filenames)):
            # not a package: scripts/, examples/, benchmarks/ and the like
            dirnames[:] = []
            continue
        for fname in sorted(filenames):
            stem, dot, suffix = fname.rpartition(".")
            if not dot or "." + suffix not in SOURCE_SUFFIXES or not stem.isidentifier():
                continue
            if not prefix and stem in _ROOT_SCRIPTS:
                continue
            if stem == "__init__":
                if not prefix:
                    continue
                yield Path(dirpath) / fname, ".".join(prefix), True
            else:
                yield Path(dirpath) / fname, ".".join(prefix + [stem]), False


def parse_file(path: Path) -> ast.Module | None:
    try:
        return ast.parse(path.read_text(encoding="utf-8", errors="replace"), filename=str(path))
    except (SyntaxError, ValueError) as exc:
        log.warning("cannot parse %s: %s", path, exc)
        return None


def resolve_relative(module: str, is_package: bool, level: int, name: str | None) -> str | None:
    """Absolute dotted target of ``from <level dots><name> import ...`` inside *module*."""
    if level == 0:
        return name
    parts = module.split(".")
    if not is_package:
        parts = parts[:-1]
    up = level - 1
    if up > len(parts):
        return None
    base = parts[: len(parts) - up] if up else parts
    if name:
        base = base + name.split(".")
    return ".".join(base) if base else None


def dotted(node: ast.AST) -> str | None:
    """``a.b.c`` for a Name/Attribute chain, else None."""
    parts = []
    while isinstance(node, ast.Attribute):
        parts.append(node.attr)
        node = node.value
    if isinstance(node, ast.Name):
        parts.append(node.id)
        return ".".join(reversed(parts))
    return None


def iter_scope(body: list[ast.stmt]) -> Iterator[ast.stmt]:
    """Statements of one scope, descending into if/try/with/for blocks but not into defs."""
    for stmt in body:
        yield stmt
        if isinstance(stmt, (ast.If, ast.For, ast.AsyncFor, ast.While, ast.With, ast.AsyncWith)):
            yield from iter_scope(stmt.body)
            yield from iter_scope(getattr(stmt, "orelse", []))
        elif isinstance(stmt, ast.Try) or type(stmt).__name__ == "TryStar":
            yield from iter_scope(stmt.body)
            for handler in stmt.handlers:
                yield from iter_scope(handler.body)
            yield from iter_scope(stmt.orelse)
            yield from iter_scope(stmt.finalbody)
