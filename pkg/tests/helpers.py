"""Test doubles and independent oracles."""

from __future__ import annotations

import itertools
import random

from reqsolve.errors import UnknownPackage
from reqsolve.versioning import Version, parse_specifier, satisfies


class DictSource:
    """In-memory stand-in for the knowledge store's version/metadata surface."""

    def __init__(self, candidates, deps=None):
        self.candidates = {p: sorted(Version(v) for v in vs) for p, vs in candidates.items()}
        self.deps = {}
        for (p, v), es in (deps or {}).items():
            self.deps[(p, Version(v))] = [(d, parse_specifier(s)) for d, s in es]

    def fetch_candidates(self, pkg, include=()):
        if pkg not in self.candidates:
            raise UnknownPackage(pkg)
        return list(self.candidates[pkg])

    def known_package(self, pkg):
        return pkg in self.candidates

    def fetch_dependencies(self, pkg, version):
        return list(self.deps.get((pkg, Version(str(version))), []))


def brute_force_optimum(problem):
    """Exhaustive arg-max of the pin-priority objective.

    Score key: (sum over requirement packages of idx + (|V|+1)*[v == pin],
    sum of idx over installed dependency-only packages,
    version-index vector in package-name order with absent = -1).
    Returns (assignment or None, number of satisfying tuples).
    """
    pkgs = sorted(problem.candidates)
    domains = []
    for p in pkgs:
        dom = list(problem.candidates[p])
        if p not in problem.pinned:
            dom.append(None)
        domains.append(dom)
    best, best_key, n_sat = None, None, 0
    for combo in itertools.product(*domains):
        model = dict(zip(pkgs, combo))
        if not is_model(problem, model):
            continue
        n_sat += 1
        primary = secondary = 0
        vector = []
        for p, v in model.items():
            cands = list(problem.candidates[p])
            idx = cands.index(v) if v is not None else -1
            vector.append(idx)
            if p in problem.pinned:
                primary += idx + (len(cands) + 1) * (v == problem.pinned[p])
            elif v is not None:
                secondary += idx
        key = (primary, secondary, vector)
        if best_key is None or key > best_key:
            best, best_key = model, key
    return best, n_sat


def is_model(problem, model):
    for p, v in problem.hard.items():
        if p in model and model[p] != v:
            return False
    for p, v in model.items():
        if v is None:
            continue
        for d, spec in problem.edges.get((p, v), ()):
            found = model.get(d)
            if found is None or not satisfies(found, spec):
                return False
    # installed packages must be reachable from the requirement roots
    seen, stack = set(problem.pinned), list(problem.pinned)
    while stack:
        p = stack.pop()
        if model.get(p) is None:
            continue
        for d, _ in problem.edges.get((p, model[p]), ()):
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return all(v is None or p in seen for p, v in model.items())


SPEC_FORMS = ["=={v}", ">={v}", "<={v}", "<{v}", ">{v}", "!={v}", ">={v},<={w}"]


def random_source(rng: random.Random, max_pkgs=4, max_versions=6, edge_p=0.35):
    n = rng.randint(1, max_pkgs)
    names = [f"p{i}" for i in range(n)]
    candidates = {}
    for name in names:
        k = rng.randint(1, max_versions)
        candidates[name] = [f"{i + 1}.0" for i in range(k)]
    deps = {}
    for name in names:
        for v in candidates[name]:
            es = []
            for other in names:
                if other != name and rng.random() < edge_p:
                    lo, hi = sorted(rng.sample(candidates[other], 2)) if len(candidates[other]) > 1 else (candidates[other][0],) * 2
                    form = rng.choice(SPEC_FORMS)
                    es.append((other, form.format(v=lo, w=hi)))
            if es:
                deps[(name, v)] = es
    return DictSource(candidates, deps), names, candidates


def all_simple_paths(graph, start, target):
    """Recursive DFS enumeration of simple paths (oracle)."""
    out = []

    def dfs(node, path):
        for nxt in graph.get(node, ()):
            if nxt in path:
                continue
            if nxt == target:
                out.append(tuple(path + [nxt]))
            else:
                dfs(nxt, path + [nxt])

    dfs(start, [start])
    return set(out)


def write_tree(root, files):
    """Create ``{relative path: text}`` under *root*."""
    from pathlib import Path

    root = Path(root)
    for rel, text in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return root


def reference_closure(entry_files, root):
    """Import closure by recursive DFS over a precomputed module table (oracle).

    Importing ``a.b.c`` executes ``a``, ``a.b`` and ``a.b.c``; ``from m import n``
    may load the submodule ``m.n``.
    """
    import ast
    from pathlib import Path

    root = Path(root).resolve()
    table = {}
    for path in root.rglob("*.py"):
        parts = list(path.relative_to(root).with_suffix("").parts)
        if parts[-1] == "__init__":
            table[".".join(parts[:-1])] = (path, True)
        else:
            table[".".join(parts)] = (path, False)
    by_path = {p: (m, pkg) for m, (p, pkg) in table.items()}

    def chain(name):
        bits = name.split(".")
        return [table[".".join(bits[:i])][0] for i in range(1, len(bits) + 1) if ".".join(bits[:i]) in table]

    def imports(path):
        module, is_pkg = by_path[path]
        here = module.split(".") if is_pkg else module.split(".")[:-1]
        names = []
        for node in ast.walk(ast.parse(path.read_text())):
            if isinstance(node, ast.Import):
                names += [a.name for a in node.names]
            elif isinstance(node, ast.ImportFrom):
                if node.level:
                    keep = len(here) - (node.level - 1)
                    if keep < 0:
                        continue
                    base = ".".join(here[:keep] + ([node.module] if node.module else []))
                else:
                    base = node.module
                if not base:
                    continue
                names.append(base)
                names += [f"{base}.{a.name}" for a in node.names if a.name != "*"]
        out = []
        for n in names:
            out += chain(n)
        return out

    seen = set()

    def visit(path):
        if path in seen:
            return
        seen.add(path)
        for nxt in imports(path):
            visit(nxt)

    for f in entry_files:
        visit(Path(f).resolve())
    return seen
