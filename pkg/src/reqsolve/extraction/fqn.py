"""Restore shortened API paths to their fully qualified definitions."""

from __future__ import annotations

import logging
from typing import Collection, Mapping

from .calls import ApiUse

log = logging.getLogger(__name__)

SIMILARITY_THRESHOLD = 0.5


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def similarity(a: str, b: str) -> float:
    """``1 - distance / max(len)``; 1.0 for identical strings."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def resolve_name(name: str, apis: Collection[str], simplify: Mapping[str, str]) -> str | None:
    """Exact lookup: inventory key, re-export entry, or a re-exported prefix."""
    if name in apis:
        return name
    if name in simplify:
        return simplify[name]
    head, _, tail = name.rpartition(".")
    while head:
        if head in simplify:
            candidate = f"{simplify[head]}.{tail}"
            if candidate in apis:
                return candidate
            break
        if head in apis:
            break
        head, _, more = head.rpartition(".")
        tail = f"{more}.{tail}"
    return None


def fuzzy_candidates(name: str, apis: Collection[str]) -> list[tuple[float, str]]:
    terminal = name.rsplit(".", 1)[-1]
    scored = [(similarity(name, cand), cand) for cand in apis if cand.rsplit(".", 1)[-1] == terminal]
    # best similarity, then the shorter path, then alphabetical
    scored.sort(key=lambda t: (-t[0], len(t[1]), t[1]))
    return scored


def restore_fqn(use: ApiUse, apis: Collection[str], simplify: Mapping[str, str],
                threshold: float = SIMILARITY_THRESHOLD) -> ApiUse | None:
    """Return *use* renamed to its fully qualified name, or None when unresolved."""
    exact = resolve_name(use.name, apis, simplify)
    if exact is not None:
        return use if exact == use.name else use.renamed(exact)
    ranked = fuzzy_candidates(use.name, apis)
    if ranked and ranked[0][0] >= threshold:
        log.debug("fuzzy match %s -> %s (%.2f)", use.name, ranked[0][1], ranked[0][0])
        return use.renamed(ranked[0][1])
    log.debug("unresolved API %s", use.name)
    return None
