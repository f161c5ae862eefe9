"""Resolve names in Python source back to the dotted paths they were imported from.

The visitor tracks imports, assignments and class inheritance so that the five
common call shapes (plain call, method on an instance, method on a call
result, call nested in an argument, method inherited from a library base
class) all come out as ``lib.pkg.module.Class.api`` style paths.
"""

from __future__ import annotations

import ast
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .._astutil import parse_file, resolve_relative

log = logging.getLogger(__name__)

Site = tuple[str, int]


@dataclass(frozen=True)
class ApiUse:
    name: str
    positional_arg_count: int = 0
    keyword_arg_names: frozenset[str] = frozenset()
    site: Site = ("", 0)
    called: bool = False
    star_args: bool = False  # *args / **kwargs at the call site: argument shape unknown

    def renamed(self, name: str) -> "ApiUse":
        return ApiUse(name, self.positional_arg_count, self.keyword_arg_names, self.site, self.called,
                      self.star_args)


class _Self:
    """Marker bound to the first parameter of a method."""

    def __init__(self, cls: "_ClassCtx"):
        self.cls = cls


class _Super(_Self):
    pass


@dataclass(frozen=True)
class _Instance:
    """Value produced by calling *path*; its attributes resolve through the callee."""

    path: str


@dataclass
class _ClassCtx:
    path: str | None
    members: set[str]
    bases: list[str]


@dataclass
class UseEvent:
    name: str
    node: ast.AST
    called: bool
    scope: str | None = None  # innermost enclosing definition path


def matches(name: str, prefixes: Iterable[str]) -> bool:
    return any(name == p or name.startswith(p + ".") for p in prefixes)


class UseVisitor(ast.NodeVisitor):
    """Collect every resolvable name reference.

    *module* is the dotted module of the file (needed for relative imports and
    to name module-level definitions); project files may pass None.
    """

    def __init__(self, module: str | None = None, is_package: bool = False,
                 bindings: dict[str, object] | None = None, path_prefix: str | None = None):
        self.module = module
        self.is_package = is_package
        self.scopes: list[dict[str, object]] = [dict(bindings or {})]
        self.paths: list[str | None] = [path_prefix if path_prefix is not None else module]
        self.classes: list[_ClassCtx] = []
        self.events: list[UseEvent] = []
        self._in_class_body = [False]

    # -- scope ---------------------------------------------------------------

    def lookup(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def bind(self, name: str, value) -> None:
        self.scopes[-1][name] = value

    def resolve(self, node: ast.AST) -> str | None:
        value = self._resolve(node)
        return value if isinstance(value, str) else None

    def _resolve(self, node: ast.AST):
        if isinstance(node, ast.Name):
            return self.lookup(node.id)
        if isinstance(node, ast.Attribute):
            base = self._resolve(node.value)
            if isinstance(base, _Self):
                cls = base.cls
                if not isinstance(base, _Super) and node.attr in cls.members:
                    return f"{cls.path}.{node.attr}" if cls.path else None
                for b in cls.bases:
                    return f"{b}.{node.attr}"
                return None
            if isinstance(base, (str, _Instance)):
                return f"{getattr(base, 'path', base)}.{node.attr}"
            return None
        if isinstance(node, ast.Call):
            if isinstance(node.func, ast.Name) and node.func.id == "super" and self.classes:
                return _Super(self.classes[-1])
            # the value of a call is tracked through its callee (class instantiation semantics)
            callee = self._resolve(node.func)
            if isinstance(callee, str):
                return _Instance(callee)
            if isinstance(callee, _Instance):
                return _Instance(callee.path)
            return None
        return None

    # -- imports -------------------------------------------------------------

    def visit_Import(self, node: ast.Import) -> None:
        for alias in node.names:
            if alias.asname:
                self.bind(alias.asname, alias.name)
            else:
                top = alias.name.split(".", 1)[0]
                self.bind(top, top)

    def visit_ImportFrom(self, node: ast.ImportFrom) -> None:
        if node.level and self.module is None:
            # relative import inside the project: never a third-party name
            for alias in node.names:
                if alias.name != "*":
                    self.bind(alias.asname or alias.name, None)
            return
        source = resolve_relative(self.module or "", self.is_package, node.level, node.module)
        if source is None:
            return
        for alias in node.names:
            if alias.name == "*":
                continue
            self.bind(alias.asname or alias.name, f"{source}.{alias.name}")

    # -- definitions ---------------------------------------------------------

    def _def_path(self, name: str) -> str | None:
        prefix = self.paths[-1]
        return f"{prefix}.{name}" if prefix else None

    def visit_FunctionDef(self, node) -> None:
        for deco in node.decorator_list:
            self.visit(deco)
        for default in list(node.args.defaults) + [d for d in node.args.kw_defaults if d is not None]:
            self.visit(default)
        path = self._def_path(node.name)
        self.bind(node.name, path)
        scope: dict[str, object] = {}
        args = node.args
        params = [a.arg for a in args.posonlyargs + args.args + args.kwonlyargs]
        params += [a.arg for a in (args.vararg, args.kwarg) if a is not None]
        for p in params:
            scope[p] = None
        in_method = self._in_class_body[-1]
        is_static = any(isinstance(d, ast.Name) and d.id == "staticmethod" for d in node.decorator_list)
        if in_method and not is_static and params:
            scope[params[0]] = _Self(self.classes[-1])
        self.scopes.append(scope)
        self.paths.append(path)
        self._in_class_body.append(False)
        for stmt in node.body:
            self.visit(stmt)
        self._in_class_body.pop()
        self.paths.pop()
        self.scopes.pop()

    visit_AsyncFunctionDef = visit_FunctionDef

    def visit_ClassDef(self, node: ast.ClassDef) -> None:
        for deco in node.decorator_list:
            self.visit(deco)
        bases = []
        for base in node.bases:
            self.visit(base)
            resolved = self.resolve(base)
            if resolved:
                bases.append(resolved)
        for kw in node.keywords:
            self.visit(kw.value)
        path = self._def_path(node.name)
        self.bind(node.name, path)
        members = set()
        for stmt in node.body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                members.add(stmt.name)
            elif isinstance(stmt, ast.Assign):
                members.update(t.id for t in stmt.targets if isinstance(t, ast.Name))
            elif isinstance(stmt, ast.AnnAssign) and isinstance(stmt.target, ast.Name):
                members.add(stmt.target.id)
        self.classes.append(_ClassCtx(path, members, bases))
        self.scopes.append({})
        self.paths.append(path)
        self._in_class_body.append(True)
        for stmt in node.body:
            self.visit(stmt)
        self._in_class_body.pop()
        self.paths.pop()
        self.scopes.pop()
        self.classes.pop()

    def visit_Lambda(self, node: ast.Lambda) -> None:
        scope = {a.arg: None for a in node.args.posonlyargs + node.args.args + node.args.kwonlyargs}
        self.scopes.append(scope)
        self.visit(node.body)
        self.scopes.pop()

    # -- assignments ---------------------------------------------------------

    def _bind_target(self, target: ast.expr, value) -> None:
        if isinstance(target, ast.Name):
            self.bind(target.id, value)
        elif isinstance(target, (ast.Tuple, ast.List)):
            for elt in target.elts:
                self._bind_target(elt, None)
        else:
            self.visit(target)

    def visit_Assign(self, node: ast.Assign) -> None:
        self.visit(node.value)
        value = self._resolve(node.value)
        for target in node.targets:
            self._bind_target(target, value)

    def visit_AnnAssign(self, node: ast.AnnAssign) -> None:
        if node.value is not None:
            self.visit(node.value)
        self._bind_target(node.target, self._resolve(node.value) if node.value is not None else None)

    def visit_For(self, node) -> None:
        self.visit(node.iter)
        self._bind_target(node.target, None)
        for stmt in node.body + node.orelse:
            self.visit(stmt)

    visit_AsyncFor = visit_For

    def visit_With(self, node) -> None:
        for item in node.items:
            self.visit(item.context_expr)
            if item.optional_vars is not None:
                self._bind_target(item.optional_vars, self._resolve(item.context_expr))
        for stmt in node.body:
            self.visit(stmt)

    visit_AsyncWith = visit_With

    # -- uses ----------------------------------------------------------------

    def _record(self, node: ast.AST, called: bool) -> None:
        name = self.resolve(node.func if isinstance(node, ast.Call) else node)
        if name:
            self.events.append(UseEvent(name, node, called, self.paths[-1]))

    def visit_Call(self, node: ast.Call) -> None:
        self._record(node, True)
        func = node.func
        if isinstance(func, ast.Attribute):
            self._visit_chain_inner(func.value)
        elif not isinstance(func, ast.Name):
            self.visit(func)
        for arg in node.args:
            self.visit(arg)
        for kw in node.keywords:
            self.visit(kw.value)

    def _visit_chain_inner(self, node: ast.AST) -> None:
        # walk down a.b.c to find nested calls/subscripts without recording prefixes
        while isinstance(node, ast.Attribute):
            node = node.value
        if not isinstance(node, ast.Name):
            self.visit(node)

    def visit_Attribute(self, node: ast.Attribute) -> None:
        if isinstance(node.ctx, ast.Load):
            self._record(node, False)
        self._visit_chain_inner(node.value)

    def visit_Name(self, node: ast.Name) -> None:
        if isinstance(node.ctx, ast.Load):
            self._record(node, False)


def use_from_event(event: UseEvent, site_file: str) -> ApiUse:
    node = event.node
    if isinstance(node, ast.Call):
        star = any(isinstance(a, ast.Starred) for a in node.args) or any(k.arg is None for k in node.keywords)
        npos = sum(1 for a in node.args if not isinstance(a, ast.Starred))
        kws = frozenset(k.arg for k in node.keywords if k.arg is not None)
        return ApiUse(event.name, npos, kws, (site_file, node.lineno), True, star)
    return ApiUse(event.name, 0, frozenset(), (site_file, getattr(node, "lineno", 0)), False, False)


def project_files(project_root: Path) -> Iterator[tuple[Path, str]]:
    """Every ``.py`` file of a project with its posix path relative to the root."""
    root = Path(project_root)
    for path in sorted(root.rglob("*.py")):
        rel = path.relative_to(root)
        if any(part.startswith(".") or part in {"__pycache__", "site-packages", "node_modules"} for part in rel.parts[:-1]):
            continue
        yield path, rel.as_posix()


def extract_direct_api_calls(project_root: Path, targets: Iterable[str],
                             failures: list[str] | None = None) -> list[ApiUse]:
    """Every reference in the project whose resolved path starts with one of *targets*."""
    targets = list(targets)
    found: dict[tuple[str, Site], ApiUse] = {}
    for path, rel in project_files(project_root):
        tree = parse_file(path)
        if tree is None:
            if failures is not None:
                failures.append(rel)
            continue
        visitor = UseVisitor()
        visitor.visit(tree)
        for event in visitor.events:
            if matches(event.name, targets):
                use = use_from_event(event, rel)
                found.setdefault((use.name, use.site), use)
    return [found[k] for k in sorted(found)]


def module_bindings(tree: ast.Module, module: str, is_package: bool) -> dict[str, object]:
    """Module-level name bindings of a library file (imports and definitions)."""
    visitor = UseVisitor(module, is_package)
    for stmt in tree.body:
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            visitor.bind(stmt.name, f"{module}.{stmt.name}")
        else:
            visitor.visit(stmt)
    return visitor.scopes[0]
