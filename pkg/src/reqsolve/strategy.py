"""The fix-point loop: solve versions, check the code, adjust one version, repeat."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .assessment import KIND_ORDER, LEVEL_ORDER, PROJECT_TPL, CompatIssue, assess
from .config import Config
from .errors import CompletionUnsatisfiable, NoPlan, ReqsolveError
from .extraction.chains import dependency_graph, diff_assignments, find_call_chains
from .extraction.usage import ExtractionContext, assemble_usage_set
from .report import COMPATIBLE, FALLBACK, InferenceReport
from .solver import Unsatisfiable, build_problem, solve, to_smtlib, validate
from .versioning import Version, parse_requirements, satisfies

log = logging.getLogger(__name__)

TARGET_DOWNGRADE = "target-downgrade"
BIDIRECTIONAL = "bidirectional"
HOLD_TARGET = "hold-target-adjust-peer"
CASCADING = "cascading"


@dataclass(frozen=True)
class SearchPlan:
    subject: str
    candidates: tuple[Version, ...]
    rationale: str
    hold: tuple[tuple[str, Version], ...] = ()  # pins fixed while this plan runs


def issue_order(issue: CompatIssue):
    """Module < ApiName < ApiParam, then Project-TPL < TPL-TPL, then entity."""
    return (KIND_ORDER[issue.kind], LEVEL_ORDER[issue.level], issue.entity, issue.package,
            issue.site or ("", 0))


def bidirectional(candidates: Iterable[Version], current: Version) -> tuple[Version, ...]:
    """Newer versions upward from *current*, then older ones downward."""
    cands = sorted(set(candidates))
    up = [v for v in cands if v > current]
    down = [v for v in reversed(cands) if v < current]
    return tuple(up + down)


def plan_changes(issue: CompatIssue, target: str, target_version: Version,
                 assignment: Mapping[str, Version],
                 candidates: Callable[[str], list[Version]]) -> list[SearchPlan]:
    """Ordered plans for one issue; raises NoPlan if none has an alternative version."""
    pkg = issue.package

    def around(name: str, rationale: str, hold=()) -> SearchPlan:
        return SearchPlan(name, bidirectional(candidates(name), assignment[name]), rationale, hold)

    if issue.level == PROJECT_TPL or len(issue.chain) < 3:
        if pkg == target:
            older = tuple(v for v in reversed(candidates(target)) if v < target_version)
            plans = [SearchPlan(target, older, TARGET_DOWNGRADE)]
        else:
            plans = [around(pkg, BIDIRECTIONAL)]
    else:
        caller, callee = issue.chain[-2], issue.chain[-1]
        if callee == target:
            plans = [around(caller, HOLD_TARGET)]
        elif caller == target:
            plans = [around(callee, HOLD_TARGET)]
        else:
            plans = [around(callee, CASCADING),
                     around(caller, CASCADING, hold=((callee, assignment[callee]),))]
    plans = [p for p in plans if p.candidates]
    if not plans:
        raise NoPlan(pkg)
    return plans


def complete_missing(reqs: Mapping[str, Version], deps: Callable[[str, Version], Iterable],
                     candidates: Callable[[str], list[Version]],
                     errors: list[ReqsolveError] | None = None) -> dict[str, Version]:
    """Add every declared but unpinned dependency at its oldest satisfying version."""
    out = dict(reqs)
    skipped: set[str] = set()
    while True:
        needed: dict[str, list] = {}
        for pkg, version in list(out.items()):
            for dep, spec in deps(pkg, version):
                if dep not in out and dep not in skipped:
                    needed.setdefault(dep, []).append(spec)
        if not needed:
            return out
        for dep in sorted(needed):
            specs = needed[dep]
            joined = ",".join(sorted({str(s) for s in specs if str(s)}))
            try:
                cands = candidates(dep)
            except ReqsolveError:
                cands = []
            ok = [c for c in cands if all(satisfies(c, s) for s in specs)]
            if not ok:
                skipped.add(dep)
                if errors is not None:
                    errors.append(CompletionUnsatisfiable(dep, joined))
                continue
            out[dep] = ok[0]


@dataclass
class LoopState:
    iteration: int = 0
    pins: dict[str, Version] = field(default_factory=dict)
    overrides: dict[str, Version] = field(default_factory=dict)
    assignment: dict[str, Version] | None = None
    issues: list[CompatIssue] = field(default_factory=list)
    tried: set[tuple[str, Version]] = field(default_factory=set)
    max_iterations: int = 50
    deadline: float = float("inf")


@dataclass
class _ActivePlan:
    issue: tuple
    plans: list[SearchPlan]
    base: dict[str, Version]  # overrides in force before the plan (the revert point)
    plan_index: int = 0
    position: int = 0


def _issue_key(issue: CompatIssue) -> tuple:
    return (issue.kind, issue.package, issue.entity)


class Inference:
    """One run of the loop.  Split out so tests can drive it with a fake store."""

    def __init__(self, config: Config, store, clock: Callable[[], float] = time.monotonic,
                 dump_formula: Path | None = None):
        self.config = config
        self.store = store
        self.clock = clock
        self.dump_formula = dump_formula
        self.target = config.target_name
        self.target_version = config.target_version
        self.start = parse_requirements(Path(config.requirements_path).read_text(encoding="utf-8"))
        self.report = InferenceReport(self.target, str(config.current_version), str(config.target_version),
                                      dict(self.start))
        self._direct: dict = {}
        self._raw: dict = {}

    # -- helpers -----------------------------------------------------------------

    def candidates(self, pkg: str) -> list[Version]:
        return self.store.fetch_candidates(pkg, include=[v for v in (self.start.get(pkg),) if v])

    def fallback(self) -> dict[str, Version]:
        pins = dict(self.start)
        pins[self.target] = self.target_version
        return pins

    def _advance(self, state: LoopState, active: _ActivePlan) -> bool:
        """Install the next untried candidate; False (and revert) when every plan is spent."""
        while active.plan_index < len(active.plans):
            plan = active.plans[active.plan_index]
            while active.position < len(plan.candidates):
                version = plan.candidates[active.position]
                active.position += 1
                if (plan.subject, version) in state.tried:
                    continue
                state.tried.add((plan.subject, version))
                overrides = dict(active.base)
                overrides.update(dict(plan.hold))
                overrides[plan.subject] = version
                state.overrides = overrides
                self.report.log("try", subject=plan.subject, version=version, rationale=plan.rationale)
                return True
            self.report.log("exhausted", subject=plan.subject, rationale=plan.rationale)
            active.plan_index += 1
            active.position = 0
        state.overrides = dict(active.base)
        return False

    def _assess_all(self, assignment: Mapping[str, Version]) -> list[CompatIssue]:
        triples = diff_assignments(self.start, assignment)
        self.report.log("changes", triples=[str(t) for t in sorted(triples, key=lambda t: t.package)])
        graph = dependency_graph(self.start, assignment, self.store.fetch_dependencies)
        ctx = ExtractionContext(self.store, self.start, assignment, self.config.max_depth,
                                self._direct, self._raw)
        issues: list[CompatIssue] = []
        for triple in sorted(triples, key=lambda t: t.package):
            if triple.from_version is None:
                self.report.note(f"{triple.package}=={triple.to_version} is newly introduced; nothing to compare")
                continue
            chains = find_call_chains(graph, triple.package)
            try:
                usage = assemble_usage_set(triple, self.config.project_path, chains, ctx)
                found = assess(triple, usage, self.store)
            except ReqsolveError as exc:
                self.report.note(f"could not assess {triple}: {exc}")
                continue
            for n in usage.notes:
                self.report.note(n)
            self.report.log("usage", package=triple.package, apis=len(usage.apis), modules=len(usage.modules),
                            chains=len(chains))
            issues.extend(found)
        issues.sort(key=issue_order)
        self.report.log("issues", issues=issues)
        return issues

    def _finish(self, state: LoopState, verdict: str, code: int, reason: str,
                final: dict[str, Version]) -> tuple[dict[str, Version], InferenceReport]:
        rep = self.report
        rep.verdict, rep.exit_code, rep.reason = verdict, code, reason
        rep.final = final
        rep.iterations = state.iteration
        rep.open_issues = list(state.issues) if verdict != COMPATIBLE else []
        rep.log("verdict", verdict=verdict, reason=reason)
        return final, rep

    def _fail(self, state: LoopState, reason: str):
        return self._finish(state, FALLBACK, 2, reason, self.fallback())

    # -- loop --------------------------------------------------------------------

    def run(self) -> tuple[dict[str, Version], InferenceReport]:
        started = self.clock()
        cfg = self.config
        state = LoopState(pins=self.fallback(), max_iterations=cfg.max_iterations,
                          deadline=started + cfg.max_seconds)
        self.report.log("start", target=self.target, target_version=self.target_version, pins=self.start)
        active: _ActivePlan | None = None
        try:
            while True:
                if state.iteration >= state.max_iterations:
                    return self._fail(state, f"iteration budget of {state.max_iterations} reached")
                if self.clock() > state.deadline:
                    return self._fail(state, f"time budget of {cfg.max_seconds:g}s reached")
                state.iteration += 1
                try:
                    problem = build_problem(self.start, self.target, self.target_version, self.store,
                                            hard=state.overrides)
                    if self.dump_formula is not None and state.iteration == 1:
                        Path(self.dump_formula).write_text(to_smtlib(problem), encoding="utf-8")
                    assignment = solve(problem)
                except (Unsatisfiable, ReqsolveError) as exc:
                    if not isinstance(exc, Unsatisfiable) and active is None:
                        raise
                    self.report.log("solve", iteration=state.iteration, hard=state.overrides,
                                    assignment=None, detail=str(exc))
                    if active is None:
                        return self._fail(state, f"version constraints cannot be met: {exc}")
                    if not self._advance(state, active):
                        return self._fail(state, "every candidate of every plan failed")
                    continue
                state.assignment = assignment
                self.report.log("solve", iteration=state.iteration, hard=state.overrides, assignment=assignment)
                violations = validate(assignment, problem)
                if violations:  # the solver guarantees this is empty
                    self.report.log("violations", items=[str(v) for v in violations])
                state.issues = self._assess_all(assignment)
                if not state.issues:
                    return self._succeed(state, assignment, started)
                top = state.issues[0]
                if active is not None and _issue_key(top) == active.issue:
                    if not self._advance(state, active):
                        return self._fail(state, "every candidate of every plan failed")
                    continue
                try:
                    plans = plan_changes(top, self.target, self.target_version, assignment, self.candidates)
                except NoPlan as exc:
                    return self._fail(state, str(exc))
                for plan in plans:
                    self.report.log("plan", subject=plan.subject, rationale=plan.rationale,
                                    candidates=[str(v) for v in plan.candidates], hold=dict(plan.hold),
                                    issue=_issue_key(top))
                active = _ActivePlan(_issue_key(top), plans, dict(state.overrides))
                if not self._advance(state, active):
                    return self._fail(state, "every candidate of every plan failed")
        finally:
            self.report.elapsed = self.clock() - started

    def _succeed(self, state: LoopState, assignment: Mapping[str, Version], started: float):
        final = {pkg: assignment[pkg] for pkg in self.start}
        errors: list[ReqsolveError] = []
        completed = complete_missing(final, self.store.fetch_dependencies, self.candidates, errors)
        added = {k: v for k, v in completed.items() if k not in final}
        if added or errors:
            self.report.log("complete", added=added, failed=[str(e) for e in errors])
        for e in errors:
            self.report.note(str(e))
        return self._finish(state, COMPATIBLE, 0, "", completed)


def run_inference(config: Config, store=None, clock: Callable[[], float] = time.monotonic,
                  dump_formula: Path | None = None) -> tuple[dict[str, Version], InferenceReport]:
    """Infer compatible pins for upgrading ``config.target_name``; see :class:`Inference`."""
    if store is None:
        store = make_store(config)
    return Inference(config, store, clock, dump_formula).run()


def make_store(config: Config):
    from .knowledge import DEFAULT_INDEX, IndexClient, KnowledgeStore

    index = IndexClient(config.index_url or DEFAULT_INDEX)
    return KnowledgeStore(config.knowledge_path, index, config.python_version, config.offline, config.aliases)
