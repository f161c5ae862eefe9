"""Hand-written verdicts per (parameter kind, change, passing) cell and the micro-fixtures that realise them."""

import ast

from reqsolve.extraction.calls import ApiUse
from reqsolve.knowledge.inventory import ApiEntry, signature_of

C, I = True, False

# (kind, change) -> verdicts for (by-position, by-name, not-passed)
EXPECTED_ROWS = {
    ("positional", "removed"): (I, I, C),
    ("positional", "added-required"): (C, C, I),
    ("positional", "added-defaulted"): (C, C, C),
    ("positional", "renamed"): (C, I, C),
    ("positional", "position-moved"): (I, C, C),
    ("positional", "kind-converted"): (I, C, C),
    ("keyword-only", "removed"): (I, I, C),
    ("keyword-only", "added-required"): (C, C, I),
    ("keyword-only", "added-defaulted"): (C, C, C),
    ("keyword-only", "renamed"): (C, I, C),
    ("keyword-only", "position-moved"): (I, C, C),
    ("keyword-only", "kind-converted"): (C, C, C),
}
PASSING_COLUMNS = ("by-position", "by-name", "not-passed")

EXPECTED = {
    (kind, change, passing): verdicts[i]
    for (kind, change), verdicts in EXPECTED_ROWS.items()
    for i, passing in enumerate(PASSING_COLUMNS)
}


def entry(params: str) -> ApiEntry:
    fn = ast.parse(f"def f({params}): pass").body[0]
    return ApiEntry("function", 1, (signature_of(fn, False),))


def call(npos=0, kws=()):
    return ApiUse("m.f", npos, frozenset(kws), ("p.py", 1), True)


# (kind, change) -> (v1 params, v2 params, {passing: call})
# cells missing here cannot be produced by a call that binds the v1 signature
FIXTURES = {
    ("positional", "removed"): ("z=0, a=0", "z=0",
                                {"by-position": call(2), "by-name": call(0, ["a"]), "not-passed": call()}),
    ("positional", "added-required"): ("z, *args, **kw", "z, a, *args, **kw",
                                       {"by-position": call(2), "by-name": call(1, ["a"]), "not-passed": call(1)}),
    ("positional", "added-defaulted"): ("z, *args, **kw", "z, a=0, *args, **kw",
                                        {"by-position": call(2), "by-name": call(1, ["a"]), "not-passed": call(1)}),
    ("positional", "renamed"): ("z=0, a=0", "z=0, b=0",
                                {"by-position": call(2), "by-name": call(0, ["a"]), "not-passed": call()}),
    ("positional", "position-moved"): ("a=0, z=0", "z=0, a=0",
                                       {"by-position": call(1), "by-name": call(0, ["a"]), "not-passed": call()}),
    ("positional", "kind-converted"): ("a=0", "*, a=0",
                                       {"by-position": call(1), "by-name": call(0, ["a"]), "not-passed": call()}),
    ("keyword-only", "removed"): ("*, a=0", "", {"by-name": call(0, ["a"]), "not-passed": call()}),
    ("keyword-only", "added-required"): ("**kw", "*, a, **kw", {"by-name": call(0, ["a"]), "not-passed": call()}),
    ("keyword-only", "added-defaulted"): ("**kw", "*, a=0, **kw", {"by-name": call(0, ["a"]), "not-passed": call()}),
    ("keyword-only", "renamed"): ("*, a: int = 0", "*, b: int = 0",
                                  {"by-name": call(0, ["a"]), "not-passed": call()}),
    ("keyword-only", "kind-converted"): ("*, a=0", "a=0", {"by-name": call(0, ["a"]), "not-passed": call()}),
}
