"""Static code inventories of an unpacked package: modules, APIs, re-exports."""

from __future__ import annotations

import ast
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .._astutil import import_root, iter_scope, iter_source_files, parse_file, resolve_relative

log = logging.getLogger(__name__)

POSITIONAL = "positional"
KEYWORD_ONLY = "keyword-only"


@dataclass(frozen=True)
class Param:
    name: str
    kind: str = POSITIONAL
    has_default: bool = False
    annotation: str | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "kind": self.kind,
            "has_default": self.has_default,
            "annotation": self.annotation,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Param":
        return cls(data["name"], data.get("kind", POSITIONAL), bool(data.get("has_default")),
                   data.get("annotation"))


@dataclass(frozen=True)
class ApiSignature:
    lineno: int
    parameters: tuple[Param, ...] = ()
    vararg: bool = False
    kwarg: bool = False

    @property
    def positional(self) -> list[Param]:
        return [p for p in self.parameters if p.kind == POSITIONAL]

    def to_json(self) -> dict[str, Any]:
        return {
            "lineno": self.lineno,
            "parameter": [p.to_json() for p in self.parameters],
            "vararg": self.vararg,
            "kwarg": self.kwarg,
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ApiSignature":
        return cls(int(data["lineno"]), tuple(Param.from_json(p) for p in data.get("parameter", [])),
                   bool(data.get("vararg")), bool(data.get("kwarg")))


@dataclass(frozen=True)
class ApiEntry:
    """One defined name.  ``signatures`` is empty for variables and for classes
    without their own ``__init__``; stub overloads give more than one."""

    type: str  # function | class | variable
    lineno: int
    signatures: tuple[ApiSignature, ...] = ()
    file: str = ""

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {"lineno": self.lineno, "type": self.type, "file": self.file}
        if self.signatures:
            data["parameter"] = [p.to_json() for p in self.signatures[0].parameters]
            data["vararg"] = self.signatures[0].vararg
            data["kwarg"] = self.signatures[0].kwarg
            if len(self.signatures) > 1:
                data["overloads"] = [s.to_json() for s in self.signatures]
        return data

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ApiEntry":
        if "overloads" in data:
            sigs = tuple(ApiSignature.from_json(s) for s in data["overloads"])
        elif "parameter" in data:
            sigs = (ApiSignature.from_json(data),)
        else:
            sigs = ()
        return cls(data.get("type", "function"), int(data["lineno"]), sigs, data.get("file", ""))


@dataclass
class ModuleInventory:
    package: str
    version: str
    modules: frozenset[str] = frozenset()

    def to_json(self) -> dict[str, Any]:
        return {"Modules": sorted(self.modules)}


@dataclass
class ApiInventory:
    package: str
    version: str
    apis: dict[str, ApiEntry] = field(default_factory=dict)
    parse_failures: list[str] = field(default_factory=list)

    def __contains__(self, name: str) -> bool:
        return name in self.apis

    def to_json(self) -> dict[str, Any]:
        return {
            "APIs": {k: self.apis[k].to_json() for k in sorted(self.apis)},
            "ParseFailures": sorted(self.parse_failures),
        }


# -- modules -----------------------------------------------------------------

def build_module_inventory(source_root: Path, package: str = "", version: str = "") -> ModuleInventory:
    root = import_root(Path(source_root))
    modules: set[str] = set()
    if root.is_dir():
        for _path, module, _is_init in iter_source_files(root):
            modules.add(module)
    return ModuleInventory(package, version, frozenset(modules))


# -- APIs --------------------------------------------------------------------

def _annotation(node: ast.expr | None) -> str | None:
    return ast.unparse(node) if node is not None else None


def _is_overload(fn: ast.FunctionDef | ast.AsyncFunctionDef) -> bool:
    for deco in fn.decorator_list:
        name = deco.attr if isinstance(deco, ast.Attribute) else getattr(deco, "id", None)
        if name == "overload":
            return True
    return False


def _is_staticmethod(fn: ast.FunctionDef | ast.AsyncFunctionDef) -> bool:
    return any(isinstance(d, ast.Name) and d.id == "staticmethod" for d in fn.decorator_list)


def signature_of(fn: ast.FunctionDef | ast.AsyncFunctionDef, bound: bool) -> ApiSignature:
    """Signature as seen by a caller; *bound* drops the implicit self/cls."""
    a = fn.args
    positional = list(a.posonlyargs) + list(a.args)
    n_defaults = len(a.defaults)
    first_default = len(positional) - n_defaults
    params = [
        Param(arg.arg, POSITIONAL, i >= first_default, _annotation(arg.annotation))
        for i, arg in enumerate(positional)
    ]
    if bound and params:
        params = params[1:]
    for arg, default in zip(a.kwonlyargs, a.kw_defaults):
        params.append(Param(arg.arg, KEYWORD_ONLY, default is not None, _annotation(arg.annotation)))
    return ApiSignature(fn.lineno, tuple(params), a.vararg is not None, a.kwarg is not None)


class _ApiCollector:
    def __init__(self, rel_file: str):
        self.rel_file = rel_file
        self.entries: dict[str, ApiEntry] = {}

    def _add_function(self, path: str, fn, bound: bool) -> None:
        sig = signature_of(fn, bound)
        prev = self.entries.get(path)
        if _is_overload(fn):
            sigs = (prev.signatures if prev is not None and prev.type == "function" else ()) + (sig,)
            lineno = prev.lineno if prev is not None else fn.lineno
            self.entries[path] = ApiEntry("function", lineno, sigs, self.rel_file)
        elif prev is not None and len(prev.signatures) > 1:
            # implementation behind a set of @overload stubs; the stubs describe it
            return
        else:
            self.entries[path] = ApiEntry("function", fn.lineno, (sig,), self.rel_file)

    def visit_scope(self, body: list[ast.stmt], prefix: str, kind: str) -> None:
        """DFS over one scope; *kind* is module, class or function."""
        for stmt in iter_scope(body):
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                path = f"{prefix}.{stmt.name}"
                bound = kind == "class" and not _is_staticmethod(stmt)
                self._add_function(path, stmt, bound)
                self.visit_scope(stmt.body, path, "function")
            elif isinstance(stmt, ast.ClassDef):
                path = f"{prefix}.{stmt.name}"
                init = next(
                    (s for s in iter_scope(stmt.body)
                     if isinstance(s, (ast.FunctionDef, ast.AsyncFunctionDef)) and s.name == "__init__"),
                    None,
                )
                sigs = (signature_of(init, True),) if init is not None else ()
                self.entries[path] = ApiEntry("class", stmt.lineno, sigs, self.rel_file)
                self.visit_scope(stmt.body, path, "class")
            elif kind == "module" and isinstance(stmt, (ast.Assign, ast.AnnAssign)):
                targets = stmt.targets if isinstance(stmt, ast.Assign) else [stmt.target]
                for target in targets:
                    for name in _assigned_names(target):
                        self.entries.setdefault(f"{prefix}.{name}", ApiEntry("variable", stmt.lineno, (), self.rel_file))


def _assigned_names(target: ast.expr) -> list[str]:
    if isinstance(target, ast.Name):
        return [target.id]
    if isinstance(target, (ast.Tuple, ast.List)):
        out: list[str] = []
        for elt in target.elts:
            out.extend(_assigned_names(elt))
        return out
    return []


def _merge(apis: dict[str, ApiEntry], name: str, entry: ApiEntry, from_stub: bool) -> None:
    prev = apis.get(name)
    if prev is None:
        apis[name] = entry
    elif from_stub and entry.signatures and (len(entry.signatures) > 1 or not prev.signatures):
        # stub overloads are more informative than a C-backed or bare definition
        apis[name] = ApiEntry(prev.type if prev.type == entry.type else entry.type,
                              prev.lineno, entry.signatures, prev.file)


def build_api_inventory(source_root: Path, package: str = "", version: str = "",
                        modules: frozenset[str] | None = None) -> tuple[ApiInventory, dict[str, str]]:
    """Walk every source file and return the API inventory and the re-export map."""
    root = import_root(Path(source_root))
    inventory = ApiInventory(package, version)
    parsed: dict[str, tuple[ast.Module, bool]] = {}
    if not root.is_dir():
        return inventory, {}
    # .py before .pyi so stub information is merged on top of real definitions
    files = sorted(iter_source_files(root), key=lambda t: (t[0].suffix == ".pyi", str(t[0])))
    for path, module, is_init in files:
        tree = parse_file(path)
        rel = path.relative_to(root).as_posix()
        if tree is None:
            inventory.parse_failures.append(rel)
            continue
        if path.suffix == ".py" or module not in parsed:
            parsed[module] = (tree, is_init)
        collector = _ApiCollector(rel)
        collector.visit_scope(tree.body, module, "module")
        for name, entry in collector.entries.items():
            _merge(inventory.apis, name, entry, path.suffix == ".pyi")
    if modules is None:
        modules = build_module_inventory(source_root).modules
    simplify = build_simplification_map(parsed, inventory, modules)
    return inventory, simplify


# -- re-exports --------------------------------------------------------------

def _literal_all(tree: ast.Module) -> list[str] | None:
    for stmt in iter_scope(tree.body):
        if isinstance(stmt, ast.Assign) and any(isinstance(t, ast.Name) and t.id == "__all__" for t in stmt.targets):
            try:
                value = ast.literal_eval(stmt.value)
            except ValueError:
                return None
            if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
                return list(value)
    return None


def build_simplification_map(parsed: dict[str, tuple[ast.Module, bool]], inventory: ApiInventory,
                             modules: frozenset[str]) -> dict[str, str]:
    """Map every name a module re-exports via ``from ... import`` to its definition.

    Chains (``pkg.f`` -> ``pkg.sub.f`` -> ``pkg.sub.impl.f``) are followed to a
    fixed point; star imports honour a literal ``__all__``.  Only targets that
    exist in the inventories survive.
    """
    tops = {m.split(".", 1)[0] for m in modules}
    aliases: dict[str, str] = {}
    stars: list[tuple[str, str]] = []  # (importing module, imported module)
    for module, (tree, is_init) in parsed.items():
        for stmt in iter_scope(tree.body):
            if not isinstance(stmt, ast.ImportFrom):
                continue
            source = resolve_relative(module, is_init, stmt.level, stmt.module)
            if not source or source.split(".", 1)[0] not in tops:
                continue
            for alias in stmt.names:
                if alias.name == "*":
                    stars.append((module, source))
                else:
                    local = alias.asname or alias.name
                    key = f"{module}.{local}"
                    if key not in inventory.apis:
                        aliases[key] = f"{source}.{alias.name}"

    def exported(mod: str) -> set[str]:
        entry = parsed.get(mod)
        declared = _literal_all(entry[0]) if entry else None
        prefix = mod + "."
        names = {k[len(prefix):] for k in inventory.apis if k.startswith(prefix) and "." not in k[len(prefix):]}
        names |= {k[len(prefix):] for k in aliases if k.startswith(prefix) and "." not in k[len(prefix):]}
        if declared is not None:
            return set(declared)
        return {n for n in names if not n.startswith("_")}

    changed = True
    while changed:  # star imports may feed other star imports
        changed = False
        for module, source in stars:
            for name in exported(source):
                key = f"{module}.{name}"
                if key not in inventory.apis and key not in aliases:
                    aliases[key] = f"{source}.{name}"
                    changed = True

    def resolve(name: str, seen: set[str]) -> str | None:
        if name in inventory.apis or name in modules:
            return name
        if name in aliases and name not in seen:
            seen.add(name)
            return resolve(aliases[name], seen)
        # an alias may point *into* another alias: pkg.A.method where pkg.A is re-exported
        head, _, tail = name.rpartition(".")
        while head:
            if head in aliases and head not in seen:
                seen.add(head)
                base = resolve(aliases[head], seen)
                return resolve(f"{base}.{tail}", seen) if base else None
            head, _, more = head.rpartition(".")
            tail = f"{more}.{tail}"
        return None

    result: dict[str, str] = {}
    for key in sorted(aliases):
        target = resolve(key, set())
        if target is not None and target != key:
            result[key] = target
    return result
