"""Decide whether the code a project reaches survives a version change."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .extraction.calls import ApiUse, Site
from .extraction.chains import ChangeTriple
from .extraction.fqn import resolve_name
from .extraction.usage import DIRECT, UsageSet
from .knowledge.inventory import KEYWORD_ONLY, POSITIONAL, ApiEntry, ApiSignature, Param

PROJECT_TPL = "Project-TPL"
TPL_TPL = "TPL-TPL"
MODULE = "Module"
API_NAME = "ApiName"
API_PARAM = "ApiParam"

KIND_ORDER = {MODULE: 0, API_NAME: 1, API_PARAM: 2}
LEVEL_ORDER = {PROJECT_TPL: 0, TPL_TPL: 1}

REMOVED = "removed"
ADDED_REQUIRED = "added-required"
ADDED_DEFAULTED = "added-defaulted"
RENAMED = "renamed"
POSITION_MOVED = "position-moved"
KIND_CONVERTED = "kind-converted"
CHANGES = (REMOVED, ADDED_REQUIRED, ADDED_DEFAULTED, RENAMED, POSITION_MOVED, KIND_CONVERTED)

BY_POSITION = "by-position"
BY_NAME = "by-name"
NOT_PASSED = "not-passed"
PASSINGS = (BY_POSITION, BY_NAME, NOT_PASSED)
KINDS = (POSITIONAL, KEYWORD_ONLY)


@dataclass(frozen=True)
class CompatIssue:
    level: str
    kind: str
    package: str
    from_version: str
    to_version: str
    entity: str
    detail: str
    site: Site | None = None
    chain: tuple[str, ...] = ()

    def sort_key(self):
        site = self.site or ("", 0)
        return (KIND_ORDER[self.kind], LEVEL_ORDER[self.level], self.entity, site, self.package)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "kind": self.kind,
            "package": self.package,
            "from_version": self.from_version,
            "to_version": self.to_version,
            "entity": self.entity,
            "detail": self.detail,
            "site": list(self.site) if self.site else None,
            "chain": list(self.chain),
        }


@dataclass(frozen=True)
class ParamChange:
    name: str
    change: str
    kind_before: str | None = None
    kind_after: str | None = None
    position_before: int | None = None
    position_after: int | None = None
    new_name: str | None = None

    @property
    def kind(self) -> str:
        """The kind the decision table looks at: the old one, or the new one for additions."""
        return self.kind_before or self.kind_after or POSITIONAL


# -- removed sets --------------------------------------------------------------

def removed_modules(pkg: str, v1, v2, store) -> set[str]:
    return set(store.modules(pkg, v1).modules) - set(store.modules(pkg, v2).modules)


def removed_api_names(apis1: Mapping[str, ApiEntry], simplify1: Mapping[str, str],
                      apis2: Mapping[str, ApiEntry], simplify2: Mapping[str, str]) -> set[str]:
    """v1 names that no longer resolve in v2.

    Covers inventory keys and v1's shortened names.  A name that v2 still
    reaches through its re-export map is not removed.
    """
    out = set()
    for name in apis1:
        if name not in apis2 and resolve_name(name, apis2, simplify2) is None:
            out.add(name)
    for short, full in simplify1.items():
        if full in out and resolve_name(short, apis2, simplify2) is None:
            out.add(short)
    return out


def removed_apis(pkg: str, v1, v2, store) -> set[str]:
    return removed_api_names(store.apis(pkg, v1).apis, store.simplify(pkg, v1),
                             store.apis(pkg, v2).apis, store.simplify(pkg, v2))


def _level(prov) -> str:
    return PROJECT_TPL if prov.kind == DIRECT else TPL_TPL


def assess_modules(triple: ChangeTriple, usage: UsageSet, s1: set[str]) -> list[CompatIssue]:
    out = []
    for path, prov in sorted(usage.modules.items()):
        if path in s1:
            out.append(CompatIssue(_level(prov), MODULE, triple.package, str(triple.from_version),
                                   str(triple.to_version), path, f"module {path} was removed", None, prov.chain))
    return out


def assess_api_names(triple: ChangeTriple, usage: UsageSet, s2: set[str],
                     simplify1: Mapping[str, str] = {}) -> list[CompatIssue]:
    """Raw import names match as written or through the v1 re-export map."""
    out = []
    for (name, site), (use, prov) in sorted(usage.apis.items()):
        hit = name in s2 or (prov.raw and simplify1.get(name) in s2)
        if hit:
            out.append(CompatIssue(_level(prov), API_NAME, triple.package, str(triple.from_version),
                                   str(triple.to_version), name, f"API {name} was removed", site, prov.chain))
    return out


# -- parameters ----------------------------------------------------------------

def _types_agree(a: Param, b: Param) -> bool:
    if a.annotation is None or b.annotation is None:
        return True
    return a.annotation == b.annotation


def diff_parameters(sig1: ApiSignature, sig2: ApiSignature) -> list[ParamChange]:
    """Map v1 parameters onto v2: by name, then by position and type for the rest."""
    pos1 = {p.name: i for i, p in enumerate(sig1.positional)}
    pos2 = {p.name: i for i, p in enumerate(sig2.positional)}
    by_name2 = {p.name: p for p in sig2.parameters}
    changes: list[ParamChange] = []
    unmatched1: list[Param] = []
    matched2: set[str] = set()

    for p in sig1.parameters:
        q = by_name2.get(p.name)
        if q is None:
            unmatched1.append(p)
            continue
        matched2.add(q.name)
        if p.kind != q.kind:
            changes.append(ParamChange(p.name, KIND_CONVERTED, p.kind, q.kind, pos1.get(p.name), pos2.get(q.name)))
        elif p.kind == POSITIONAL and pos1[p.name] != pos2[q.name]:
            changes.append(ParamChange(p.name, POSITION_MOVED, p.kind, q.kind, pos1[p.name], pos2[q.name]))

    # renames: same slot and compatible type among the leftovers
    leftover2 = [q for q in sig2.parameters if q.name not in matched2]
    for p in unmatched1:
        partner = None
        for q in leftover2:
            if p.kind != q.kind:
                continue
            if p.kind == POSITIONAL and pos1[p.name] == pos2[q.name] and _types_agree(p, q):
                partner = q
            elif (p.kind == KEYWORD_ONLY and p.annotation is not None
                  and p.annotation == q.annotation and p.has_default == q.has_default):
                partner = q
            if partner is not None:
                break
        if partner is None:
            changes.append(ParamChange(p.name, REMOVED, p.kind, None, pos1.get(p.name), None))
        else:
            leftover2.remove(partner)
            changes.append(ParamChange(p.name, RENAMED, p.kind, partner.kind, pos1.get(p.name),
                                       pos2.get(partner.name), partner.name))
    for q in leftover2:
        change = ADDED_DEFAULTED if q.has_default else ADDED_REQUIRED
        changes.append(ParamChange(q.name, change, None, q.kind, None, pos2.get(q.name)))
    return changes


def _rule(kind: str, change: str, passing: str) -> bool:
    """Verdict for one (parameter kind, change, passing) cell; True means compatible."""
    if change == REMOVED:
        return passing == NOT_PASSED
    if change == ADDED_REQUIRED:
        return passing != NOT_PASSED
    if change == ADDED_DEFAULTED:
        return True
    if change == RENAMED:
        return passing != BY_NAME
    if change == POSITION_MOVED:
        return passing != BY_POSITION
    if change == KIND_CONVERTED:
        # only positional -> keyword-only breaks, and only for positional passing
        return not (kind == POSITIONAL and passing == BY_POSITION)
    raise ValueError(change)


DECISION_TABLE: dict[tuple[str, str, str], bool] = {
    (k, c, m): _rule(k, c, m) for k in KINDS for c in CHANGES for m in PASSINGS
}


def passing_of(use: ApiUse, change: ParamChange) -> str:
    """How the call site supplies the parameter the change is about."""
    if change.change in (ADDED_REQUIRED, ADDED_DEFAULTED):
        name, position = change.name, change.position_after
    else:
        name, position = change.name, change.position_before
    if name in use.keyword_arg_names:
        return BY_NAME
    if position is not None and position < use.positional_arg_count:
        return BY_POSITION
    return NOT_PASSED


def assess_parameters(use: ApiUse, changes: Sequence[ParamChange], sig2: ApiSignature | None = None
                      ) -> tuple[ParamChange, str] | None:
    """First incompatible change with its passing method, or None when the call still binds.

    When *sig2* accepts ``*args``/``**kwargs`` those absorb arguments aimed at
    removed or renamed parameters.  A call that itself spreads ``*args`` or
    ``**kwargs`` may supply anything, so added-required parameters pass.
    """
    for change in changes:
        passing = passing_of(use, change)
        if DECISION_TABLE[(change.kind, change.change, passing)]:
            continue
        if sig2 is not None:
            if passing == BY_POSITION and sig2.vararg and change.change == REMOVED:
                continue
            if passing == BY_NAME and sig2.kwarg and change.change in (REMOVED, RENAMED):
                continue
        if change.change == ADDED_REQUIRED and use.star_args:
            continue
        return change, passing
    return None


def _binds(use: ApiUse, sig: ApiSignature) -> bool:
    """Would the call's shape bind to *sig* at all (arity and keyword names)?"""
    if use.star_args:
        return True
    if use.positional_arg_count > len(sig.positional) and not sig.vararg:
        return False
    names = {p.name for p in sig.parameters}
    if not sig.kwarg and not use.keyword_arg_names <= names:
        return False
    bound = set(p.name for p in sig.positional[: use.positional_arg_count]) | set(use.keyword_arg_names)
    return all(p.has_default or p.name in bound for p in sig.parameters)


def _signatures(entry: ApiEntry) -> tuple[ApiSignature, ...]:
    if entry.signatures:
        return entry.signatures
    if entry.type == "class":
        return (ApiSignature(entry.lineno, ()),)
    return ()


def check_call(use: ApiUse, entry1: ApiEntry, entry2: ApiEntry) -> str | None:
    """Reason the call breaks under v2, or None.

    With overloads the call is fine if some v2 signature accepts it against
    some v1 signature the call binds to.
    """
    sigs1, sigs2 = _signatures(entry1), _signatures(entry2)
    if not sigs1 or not sigs2:
        return None
    relevant = [s for s in sigs1 if _binds(use, s)]
    if not relevant:
        return None
    reasons = []
    for s1 in relevant:
        for s2 in sigs2:
            verdict = assess_parameters(use, diff_parameters(s1, s2), s2)
            if verdict is None:
                return None
            change, passing = verdict
            reasons.append(f"parameter '{change.name}' {change.change}, passed {passing}")
    return sorted(reasons)[0]


def assess(triple: ChangeTriple, usage: UsageSet, store) -> list[CompatIssue]:
    """Module, API-name and parameter issues of one change, deduplicated and sorted."""
    if triple.from_version is None or triple.from_version == triple.to_version or not len(usage):
        return []
    pkg, v1, v2 = triple.package, triple.from_version, triple.to_version
    apis1, simp1 = store.apis(pkg, v1).apis, store.simplify(pkg, v1)
    apis2, simp2 = store.apis(pkg, v2).apis, store.simplify(pkg, v2)
    s1 = removed_modules(pkg, v1, v2, store)
    s2 = removed_api_names(apis1, simp1, apis2, simp2)
    issues = assess_modules(triple, usage, s1) + assess_api_names(triple, usage, s2, simp1)
    for (name, site), (use, prov) in sorted(usage.apis.items()):
        if not use.called or prov.raw or name in s2:
            continue
        fqn1 = resolve_name(name, apis1, simp1)
        fqn2 = resolve_name(name, apis2, simp2)
        if fqn1 is None or fqn2 is None or fqn1 not in apis1 or fqn2 not in apis2:
            continue
        reason = check_call(use, apis1[fqn1], apis2[fqn2])
        if reason is not None:
            issues.append(CompatIssue(_level(prov), API_PARAM, pkg, str(v1), str(v2), name, reason, site,
                                      prov.chain))
    return dedupe(issues)


def dedupe(issues: Iterable[CompatIssue]) -> list[CompatIssue]:
    seen = set()
    out = []
    for issue in sorted(issues, key=CompatIssue.sort_key):
        key = (issue.kind, issue.entity, issue.site)
        if key not in seen:
            seen.add(key)
            out.append(issue)
    return out
