"""Assemble the APIs and modules a project reaches in one changed package."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ..errors import ReqsolveError
from ..versioning import Version
from .callgraph import build_on_demand_call_graph
from .calls import ApiUse, Site, extract_direct_api_calls, project_files
from .chains import PROJECT, ChangeTriple
from .fqn import resolve_name, restore_fqn
from .imports import derive_import_modules, entry_files_for, extract_import_apis, find_related_files

log = logging.getLogger(__name__)

DIRECT = "direct"
CHAIN = "chain"
IMPORT_CLOSURE = "import-closure"


@dataclass(frozen=True)
class Provenance:
    kind: str  # direct | chain | import-closure
    chain: tuple[str, ...]
    raw: bool = False  # name kept exactly as written in an import statement


@dataclass
class UsageSet:
    """APIs and modules the upgrade could break.  The first provenance recorded for an element wins."""

    apis: dict[tuple[str, Site], tuple[ApiUse, Provenance]] = field(default_factory=dict)
    modules: dict[str, Provenance] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def add_api(self, use: ApiUse, prov: Provenance) -> None:
        self.apis.setdefault((use.name, use.site), (use, prov))

    def add_module(self, path: str, prov: Provenance) -> None:
        self.modules.setdefault(path, prov)

    def merge(self, other: "UsageSet") -> None:
        for use, prov in other.apis.values():
            self.add_api(use, prov)
        for path, prov in other.modules.items():
            self.add_module(path, prov)
        self.notes.extend(other.notes)

    def __len__(self) -> int:
        return len(self.apis) + len(self.modules)


@dataclass
class ExtractionContext:
    """What extraction needs from the rest of the run.

    *store* provides apis/modules/simplify/import_names/import_root per
    (package, version); *start* are the starting pins and *assignment* the
    solved versions.
    """

    store: object
    start: Mapping[str, Version]
    assignment: Mapping[str, Version]
    max_depth: int = 10
    _direct: dict = field(default_factory=dict)
    _raw: dict = field(default_factory=dict)

    def direct_uses(self, project_root: Path, names: tuple[str, ...]) -> list[ApiUse]:
        key = (str(project_root), names)
        if key not in self._direct:
            self._direct[key] = extract_direct_api_calls(project_root, names)
        return self._direct[key]

    def project_imports(self, project_root: Path, names: tuple[str, ...]):
        key = (str(project_root), names)
        if key not in self._raw:
            files = [p for p, _ in project_files(project_root)]
            self._raw[key] = sorted(extract_import_apis(files, names, root=project_root))
        return self._raw[key]


def _add_raw_imports(usage: UsageSet, raws, apis, simplify, modules, prov_kind: str,
                     chain: tuple[str, ...]) -> None:
    """Raw import names join the API set when they name an API; their prefixes join the module set."""
    prov = Provenance(prov_kind, chain, raw=True)
    for raw in raws:
        if not raw.star and (resolve_name(raw.name, apis, simplify) is not None or raw.name in simplify):
            usage.add_api(ApiUse(raw.name, site=raw.site), prov)
        for mod in sorted(derive_import_modules([raw.name])):
            if mod in modules:
                usage.add_module(mod, prov)


def _direct_usage(triple: ChangeTriple, project_root: Path, ctx: ExtractionContext) -> UsageSet:
    usage = UsageSet()
    store, v1 = ctx.store, triple.from_version
    chain = (PROJECT, triple.package)
    names = tuple(store.import_names(triple.package, v1))
    apis, simplify = store.apis(triple.package, v1).apis, store.simplify(triple.package, v1)
    modules = store.modules(triple.package, v1).modules
    prov = Provenance(DIRECT, chain)
    for use in ctx.direct_uses(project_root, names):
        restored = restore_fqn(use, apis, simplify)
        if restored is not None:
            usage.add_api(restored, prov)
    _add_raw_imports(usage, ctx.project_imports(project_root, names), apis, simplify, modules, DIRECT, chain)
    return usage


def _chain_usage(triple: ChangeTriple, project_root: Path, chain: tuple[str, ...],
                 ctx: ExtractionContext) -> UsageSet:
    usage = UsageSet()
    store, v1 = ctx.store, triple.from_version
    target = triple.package
    t_apis, t_simplify = store.apis(target, v1).apis, store.simplify(target, v1)
    t_modules = store.modules(target, v1).modules

    # entrance: what the project touches in the first intermediate
    first = chain[1]
    first_v = ctx.assignment[first]
    names = tuple(store.import_names(first, first_v))
    entries = {u.name for u in ctx.direct_uses(project_root, names)}
    entries |= {r.name for r in ctx.project_imports(project_root, names)}
    if first not in ctx.start:
        usage.notes.append(f"{first} is newly introduced; its entrance APIs resolve against {first_v}")

    for i, pkg in enumerate(chain[1:-1], start=1):
        version = ctx.assignment[pkg]
        nxt = chain[i + 1]
        nxt_version = v1 if nxt == target else ctx.assignment[nxt]
        inv = store.apis(pkg, version)
        simplify = store.simplify(pkg, version)
        root = store.import_root(pkg, version)
        own = store.import_names(pkg, version)
        dep_names = {n: nxt for n in store.import_names(nxt, nxt_version)}
        graph = build_on_demand_call_graph(entries, root, inv, simplify, own, dep_names,
                                           ctx.max_depth, store.modules(pkg, version).modules)
        boundary = [use for owner, use in graph.boundary if owner == nxt]
        if nxt == target:
            prov = Provenance(CHAIN, chain)
            for use in boundary:
                restored = restore_fqn(use, t_apis, t_simplify)
                if restored is not None:
                    usage.add_api(_in_package(restored, pkg), prov)
            # import closure of the last intermediate
            entry_files = []
            for fqn in graph.visited:
                entry_files.extend(entry_files_for(fqn, root))
            files = find_related_files(entry_files, root)
            raws = sorted(extract_import_apis(sorted(files), dep_names, root=root))
            raws = [type(r)(r.name, (f"{pkg}:{r.site[0]}", r.site[1]), r.star) for r in raws]
            _add_raw_imports(usage, raws, t_apis, t_simplify, t_modules, IMPORT_CLOSURE, chain)
        else:
            entries = {use.name for use in boundary}
    return usage


def _in_package(use: ApiUse, pkg: str) -> ApiUse:
    """Prefix the site file with the package it lives in so sites stay unambiguous."""
    return ApiUse(use.name, use.positional_arg_count, use.keyword_arg_names,
                  (f"{pkg}:{use.site[0]}", use.site[1]), use.called, use.star_args)


def assemble_usage_set(triple: ChangeTriple, project_root: Path, chains, ctx: ExtractionContext) -> UsageSet:
    """Union of direct usage and every longer chain's transitive usage of ``triple.package``.

    Everything is filtered against the package's starting-version inventories,
    so a package without a starting version yields an empty set.
    """
    usage = UsageSet()
    if triple.from_version is None:
        return usage
    project_root = Path(project_root)
    for chain in sorted(chains, key=lambda c: (len(c), c)):
        try:
            if len(chain) == 2:
                part = _direct_usage(triple, project_root, ctx)
            else:
                part = _chain_usage(triple, project_root, tuple(chain), ctx)
        except ReqsolveError as exc:
            log.warning("chain %s skipped: %s", " -> ".join(chain), exc)
            usage.notes.append(f"chain {' -> '.join(chain)} skipped: {exc}")
            continue
        usage.merge(part)
    return usage
