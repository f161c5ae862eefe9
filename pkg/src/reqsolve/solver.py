"""Version selection as weighted boolean satisfiability.

Every (package, version) pair is a selector literal.  The hard part is the
recursive dependency formula; the soft part prefers the version already pinned
in the requirements (weight ``|V| + 1``) and otherwise the newest version.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Protocol, Sequence

from .errors import IndexUnavailable, ReqsolveError, TargetVersionUnknown, UnknownPackage, UnsatisfiablePin
from .versioning import SpecifierSet, Version, normalize_name, satisfies

log = logging.getLogger(__name__)

Edge = tuple[str, SpecifierSet]


class DependencySource(Protocol):
    def fetch_candidates(self, pkg: str, include: Iterable[Version] = ()) -> list[Version]: ...

    def fetch_dependencies(self, pkg: str, version: Version) -> list[Edge]: ...


@dataclass(frozen=True)
class Conflict:
    package: str
    version: Version
    dependency: str
    specifier: str
    reason: str

    def __str__(self) -> str:
        return f"{self.package}=={self.version} requires {self.dependency}{self.specifier}: {self.reason}"


class Unsatisfiable(ReqsolveError):
    def __init__(self, conflicts: Sequence[Conflict] = ()):
        self.conflicts = list(conflicts)
        detail = "; ".join(map(str, self.conflicts)) or "no assignment satisfies every constraint"
        super().__init__(detail)


@dataclass(frozen=True)
class ConstraintProblem:
    candidates: Mapping[str, tuple[Version, ...]]
    edges: Mapping[tuple[str, Version], tuple[Edge, ...]]
    pinned: Mapping[str, Version]
    hard: Mapping[str, Version] = field(default_factory=dict)

    @property
    def roots(self) -> list[str]:
        return list(self.pinned)

    def allowed(self, dep: str, spec: SpecifierSet) -> frozenset[Version]:
        return frozenset(v for v in self.candidates.get(dep, ()) if satisfies(v, spec))

    def deps(self, pkg: str, version: Version) -> tuple[Edge, ...]:
        return self.edges.get((pkg, version), ())


def build_problem(reqs: Mapping[str, Version], target: str, target_version: Version,
                  source: DependencySource, hard: Mapping[str, Version] | None = None,
                  max_depth: int | None = None) -> ConstraintProblem:
    """Pinned map with the target overridden, plus the transitive candidate closure."""
    target = normalize_name(target)
    if target not in reqs:
        raise TargetVersionUnknown(target, str(target_version))
    pinned = dict(reqs)
    pinned[target] = target_version
    hard_pins = {target: target_version}
    hard_pins.update({normalize_name(k): v for k, v in (hard or {}).items()})

    candidates: dict[str, tuple[Version, ...]] = {}
    edges: dict[tuple[str, Version], tuple[Edge, ...]] = {}
    depth = {p: 0 for p in pinned}
    queue = deque(pinned)
    while queue:
        pkg = queue.popleft()
        include = [v for v in (reqs.get(pkg), pinned.get(pkg), hard_pins.get(pkg)) if v is not None]
        cands = tuple(source.fetch_candidates(pkg, include=include))
        candidates[pkg] = cands
        if max_depth is not None and depth[pkg] >= max_depth:
            continue
        for v in cands:
            kept = []
            for dep, spec in source.fetch_dependencies(pkg, v):
                if dep not in depth:
                    if not _known(source, dep):
                        log.info("dropping edge %s==%s -> %s: not on index", pkg, v, dep)
                        continue
                    depth[dep] = depth[pkg] + 1
                    queue.append(dep)
                kept.append((dep, spec))
            edges[(pkg, v)] = tuple(kept)

    if target_version not in candidates[target]:
        raise TargetVersionUnknown(target, str(target_version))
    for pkg, v in list(pinned.items()) + list(hard_pins.items()):
        if pkg in candidates and v not in candidates[pkg]:
            raise UnsatisfiablePin(pkg, str(v))
    # edges into packages beyond the depth cut are kept only if those have candidates
    edges = {k: tuple(e for e in es if e[0] in candidates) for k, es in edges.items()}
    return ConstraintProblem(candidates, edges, pinned, hard_pins)


def _known(source: DependencySource, pkg: str) -> bool:
    probe = getattr(source, "known_package", None)
    if probe is not None:
        return probe(pkg)
    try:
        source.fetch_candidates(pkg)
        return True
    except (UnknownPackage, IndexUnavailable):
        return False


# -- formula -----------------------------------------------------------------

class Formula:
    """Tiny boolean expression DAG; shared nodes are encoded once."""

    def evaluate(self, model: Mapping[str, Version | None], memo: dict | None = None) -> bool:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Var(Formula):
    package: str
    version: Version

    def evaluate(self, model, memo=None):
        return model.get(self.package) == self.version

    @property
    def name(self) -> str:
        return f"|{self.package}=={self.version}|"


@dataclass(frozen=True, eq=False)
class Not(Formula):
    child: Formula

    def evaluate(self, model, memo=None):
        return not self.child.evaluate(model, memo)


@dataclass(frozen=True, eq=False)
class And(Formula):
    children: tuple[Formula, ...]
    label: str | None = None

    def evaluate(self, model, memo=None):
        memo = {} if memo is None else memo
        key = id(self)
        if key not in memo:
            memo[key] = all(c.evaluate(model, memo) for c in self.children)
        return memo[key]


@dataclass(frozen=True, eq=False)
class Or(Formula):
    children: tuple[Formula, ...]

    def evaluate(self, model, memo=None):
        memo = {} if memo is None else memo
        key = id(self)
        if key not in memo:
            memo[key] = any(c.evaluate(model, memo) for c in self.children)
        return memo[key]


@dataclass(frozen=True, eq=False)
class Reachable(Formula):
    """Holds when every installed package is reachable from the roots through
    the selected versions' dependency edges (a package is installed only
    because something needs it)."""

    problem: ConstraintProblem

    def evaluate(self, model, memo=None):
        return not _unreachable(self.problem, model)


def _unreachable(problem: ConstraintProblem, model: Mapping[str, Version | None]) -> set[str]:
    seen = set(problem.roots)
    stack = list(problem.roots)
    while stack:
        p = stack.pop()
        v = model.get(p)
        if v is None:
            continue
        for dep, _spec in problem.deps(p, v):
            if dep not in seen:
                seen.add(dep)
                stack.append(dep)
    return {p for p, v in model.items() if v is not None and p not in seen}


def encode(problem: ConstraintProblem) -> Formula:
    """Recursive dependency formula, memoized per (package, version).

    A pair already being expanded further up the recursion is referenced by
    its bare selector literal, so cyclic metadata terminates.
    """
    nodes: dict[tuple[str, Version], Formula] = {}
    in_progress: set[tuple[str, Version]] = set()

    def tpl_exp(pkg: str, version: Version) -> Formula:
        key = (pkg, version)
        if key in nodes:
            return nodes[key]
        if key in in_progress:
            return Var(pkg, version)
        in_progress.add(key)
        parts: list[Formula] = [Var(pkg, version)]
        for dep, spec in problem.deps(pkg, version):
            parts.append(Or(tuple(tpl_exp(dep, v) for v in problem.candidates.get(dep, ()) if satisfies(v, spec))))
        in_progress.discard(key)
        node = And(tuple(parts), label=f"{pkg}=={version}")
        nodes[key] = node
        return node

    clauses: list[Formula] = []
    for pkg in sorted(problem.candidates):
        versions = problem.candidates[pkg]
        options = [tpl_exp(pkg, v) for v in versions]
        if pkg not in problem.pinned:
            options.append(And(tuple(Not(Var(pkg, v)) for v in versions), label=f"{pkg} absent"))
        clauses.append(Or(tuple(options)))
        # at most one version per package
        for i, a in enumerate(versions):
            for b in versions[i + 1:]:
                clauses.append(Not(And((Var(pkg, a), Var(pkg, b)))))
    for pkg, v in sorted(problem.hard.items()):
        clauses.append(Var(pkg, v))
    clauses.append(Reachable(problem))
    return And(tuple(clauses), label="root")


def to_smtlib(problem: ConstraintProblem, formula: Formula | None = None) -> str:
    """SMT-LIB text of the hard formula and the objective (z3 ``maximize`` dialect)."""
    formula = formula if formula is not None else encode(problem)
    lines = ["; version selection problem", "(set-logic QF_LIA)"]
    for pkg in sorted(problem.candidates):
        for v in problem.candidates[pkg]:
            lines.append(f"(declare-const {Var(pkg, v).name} Bool)")
    defined: dict[int, str] = {}

    def ref(node: Formula) -> str:
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Not):
            return f"(not {ref(node.child)})"
        if isinstance(node, Reachable):
            return "true"
        if id(node) in defined:
            return defined[id(node)]
        op = "and" if isinstance(node, And) else "or"
        kids = " ".join(ref(c) for c in node.children) or ("true" if op == "and" else "false")
        text = f"({op} {kids})"
        label = getattr(node, "label", None)
        if label and label != "root":
            name = f"|node {label}|"
            lines.append(f"(define-fun {name} () Bool {text})")
            defined[id(node)] = name
            return name
        return text

    lines.append(f"(assert {ref(formula)})")
    lines.append("; installed packages must be reachable from the requirements (checked by the solver)")
    terms = []
    for pkg in sorted(problem.candidates):
        for i, v in enumerate(problem.candidates[pkg]):
            w = weight(problem, pkg, v)
            if w:
                terms.append(f"(ite {Var(pkg, v).name} {w} 0)")
    lines.append(f"(maximize (+ 0 {' '.join(terms)}))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# -- objective ---------------------------------------------------------------

def _secondary_scale(problem: ConstraintProblem) -> int:
    return 1 + sum(len(c) for p, c in problem.candidates.items() if p not in problem.pinned)


def pin_term(problem: ConstraintProblem, pkg: str, version: Version | None) -> int:
    """Per-package objective term: ``(|V|+1)*[v == V_x] + index(v)`` (0-based index)."""
    if version is None:
        return 0
    cands = problem.candidates[pkg]
    term = cands.index(version)
    if problem.pinned.get(pkg) == version:
        term += len(cands) + 1
    return term


def weight(problem: ConstraintProblem, pkg: str, version: Version | None) -> int:
    """Combined integer weight.  Requirement packages carry the pin-priority
    objective; dependency-only packages contribute their index term on a
    strictly lower tier so they can never outvote a pinned version."""
    if pkg in problem.pinned:
        return pin_term(problem, pkg, version) * _secondary_scale(problem)
    return pin_term(problem, pkg, version)


def objective(problem: ConstraintProblem, assignment: Mapping[str, Version | None]) -> int:
    return sum(weight(problem, p, assignment.get(p)) for p in problem.candidates)


def pin_objective(problem: ConstraintProblem, assignment: Mapping[str, Version | None]) -> int:
    """The pin-priority objective restricted to requirement packages."""
    return sum(pin_term(problem, p, assignment.get(p)) for p in problem.pinned)


# -- search ------------------------------------------------------------------

Assignment = dict[str, Version]
Backend = Callable[[ConstraintProblem], Assignment]


def solve(problem: ConstraintProblem, backend: Backend | None = None) -> Assignment:
    """Optimal full assignment, or raise :class:`Unsatisfiable`.

    Among equal objective values the winner is the lexicographically greatest
    version vector in package-name order.
    """
    if backend is not None:
        return backend(problem)
    return BranchAndBound(problem).run()


class BranchAndBound:
    def __init__(self, problem: ConstraintProblem):
        self.p = problem
        self.order = sorted(problem.candidates)
        self.best: dict[str, Version | None] | None = None
        self.best_score = -1
        self.nodes = 0
        # reverse edges: who may require pkg, and with what allowed set
        self.allowed: dict[tuple[str, Version, str], frozenset[Version]] = {}
        self.requirers: dict[str, list[tuple[str, Version]]] = {pkg: [] for pkg in problem.candidates}
        for (pkg, v), es in problem.edges.items():
            for dep, spec in es:
                self.allowed[(pkg, v, dep)] = problem.allowed(dep, spec)
                self.requirers.setdefault(dep, []).append((pkg, v))

    def initial_domains(self) -> dict[str, list[Version | None]]:
        domains = {}
        for pkg in self.order:
            values: list[Version | None] = sorted(self.p.candidates[pkg], reverse=True)
            if pkg in self.p.hard:
                values = [v for v in values if v == self.p.hard[pkg]]
            if pkg not in self.p.pinned and pkg not in self.p.hard:
                values.append(None)
            domains[pkg] = values
        return domains

    def compatible(self, pkg: str, val: Version | None, other: str, oval: Version | None) -> bool:
        if val is not None:
            allowed = self.allowed.get((pkg, val, other))
            if allowed is not None and oval not in allowed:
                return False
        if oval is not None:
            allowed = self.allowed.get((other, oval, pkg))
            if allowed is not None and val not in allowed:
                return False
        return True

    def run(self) -> Assignment:
        domains = self.initial_domains()
        if any(not d for d in domains.values()):
            raise Unsatisfiable(self.explain())
        self._search(0, {}, domains, 0)
        if self.best is None:
            raise Unsatisfiable(self.explain())
        return {p: self.best[p] for p in self.p.pinned} | {
            p: v for p, v in sorted(self.best.items()) if v is not None and p not in self.p.pinned
        }

    def _search(self, i: int, partial: dict, domains: dict, score: int) -> None:
        self.nodes += 1
        if i == len(self.order):
            if _unreachable(self.p, partial):
                return
            if score > self.best_score:
                self.best, self.best_score = dict(partial), score
            return
        bound = score + sum(max(weight(self.p, u, x) for x in domains[u]) for u in self.order[i:])
        if bound <= self.best_score:
            return
        pkg = self.order[i]
        for val in domains[pkg]:
            if val is not None and not self._may_be_installed(pkg, partial, domains, i):
                continue
            new_domains = self._propagate(pkg, val, domains, i)
            if new_domains is None:
                continue
            partial[pkg] = val
            self._search(i + 1, partial, new_domains, score + weight(self.p, pkg, val))
            del partial[pkg]

    def _may_be_installed(self, pkg: str, partial: dict, domains: dict, i: int) -> bool:
        if pkg in self.p.pinned:
            return True
        for q, w in self.requirers.get(pkg, ()):
            if q in partial:
                if partial[q] == w:
                    return True
            elif w in domains.get(q, ()):
                return True
        return False

    def _propagate(self, pkg: str, val, domains: dict, i: int) -> dict | None:
        new = dict(domains)
        new[pkg] = [val]
        for u in self.order[i + 1:]:
            kept = [x for x in domains[u] if self.compatible(pkg, val, u, x)]
            if not kept:
                return None
            if len(kept) != len(domains[u]):
                new[u] = kept
        return new

    def explain(self) -> list[Conflict]:
        out = []
        for pkg, v in sorted(self.p.hard.items()):
            for dep, spec in self.p.deps(pkg, v):
                allowed = self.p.allowed(dep, spec)
                if not allowed:
                    out.append(Conflict(pkg, v, dep, str(spec), "no candidate satisfies"))
                elif dep in self.p.hard and self.p.hard[dep] not in allowed:
                    out.append(Conflict(pkg, v, dep, str(spec), f"conflicts with pinned {dep}=={self.p.hard[dep]}"))
        return out


# -- validation --------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    package: str
    version: Version
    dependency: str
    specifier: str
    found: Version | None

    def __str__(self) -> str:
        return f"{self.package}=={self.version} requires {self.dependency}{self.specifier}, found {self.found}"


def validate(assignment: Mapping[str, Version],
             deps: Callable[[str, Version], Iterable[Edge]] | ConstraintProblem,
             scope: Iterable[str] | None = None) -> list[Violation]:
    """Every dependency edge of every assigned pair that does not hold.

    A missing dependency counts as a violation when it is in *scope* (all
    packages when *scope* is None).
    """
    if isinstance(deps, ConstraintProblem):
        problem = deps
        deps = problem.deps
        scope = problem.candidates if scope is None else scope
    scope_set = set(scope) if scope is not None else None
    out = []
    for pkg, v in assignment.items():
        for dep, spec in deps(pkg, v):
            found = assignment.get(dep)
            if found is None:
                if scope_set is None or dep in scope_set:
                    out.append(Violation(pkg, v, dep, str(spec), None))
            elif not satisfies(found, spec):
                out.append(Violation(pkg, v, dep, str(spec), found))
    return out
