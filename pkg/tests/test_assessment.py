import ast
import itertools

import pytest

from reqsolve.assessment import (
    API_NAME,
    API_PARAM,
    CHANGES,
    DECISION_TABLE,
    KINDS,
    MODULE,
    PASSINGS,
    PROJECT_TPL,
    TPL_TPL,
    CompatIssue,
    ParamChange,
    assess_api_names,
    assess_modules,
    assess_parameters,
    check_call,
    dedupe,
    diff_parameters,
    passing_of,
    removed_api_names,
)
from reqsolve.extraction import ApiUse, ChangeTriple
from reqsolve.extraction.usage import CHAIN, DIRECT, IMPORT_CLOSURE, Provenance, UsageSet
from reqsolve.knowledge.inventory import ApiEntry, signature_of
from reqsolve.versioning import Version

from param_matrix import EXPECTED, FIXTURES, call, entry


def sig(params):
    return signature_of(ast.parse(f"def f({params}): pass").body[0], False)


# -- removed sets ----------------------------------------------------------------

def test_removed_apis_set_difference():
    e = ApiEntry("function", 1)
    apis1 = {"s.misc.comb": e, "s.special.comb": e, "s.keep": e}
    apis2 = {"s.special.comb": e, "s.keep": e}
    assert removed_api_names(apis1, {}, apis2, {}) == {"s.misc.comb"}
    assert removed_api_names(apis1, {}, apis1, {}) == set()


def test_reexported_name_is_not_removed():
    e = ApiEntry("function", 1)
    apis1 = {"sklearn.metrics.classification.accuracy_score": e}
    apis2 = {"sklearn.metrics._classification.accuracy_score": e}
    simplify2 = {"sklearn.metrics.classification.accuracy_score": "sklearn.metrics._classification.accuracy_score",
                 "sklearn.metrics.accuracy_score": "sklearn.metrics._classification.accuracy_score"}
    assert removed_api_names(apis1, {}, apis2, simplify2) == set()
    assert removed_api_names(apis1, {}, apis2, {}) == {"sklearn.metrics.classification.accuracy_score"}


def test_removed_shortened_name_is_reported():
    e = ApiEntry("variable", 1)
    apis1 = {"PIL._version.PILLOW_VERSION": e}
    simplify1 = {"PIL.PILLOW_VERSION": "PIL._version.PILLOW_VERSION"}
    assert removed_api_names(apis1, simplify1, {}, {}) == {"PIL._version.PILLOW_VERSION", "PIL.PILLOW_VERSION"}


def _usage(modules=(), apis=()):
    u = UsageSet()
    for path, kind in modules:
        u.add_module(path, Provenance(kind, ("project", "x")))
    for use, kind, raw in apis:
        u.add_api(use, Provenance(kind, ("project", "x"), raw))
    return u


T = ChangeTriple("numpy", Version("1.16.4"), Version("1.18.0"))


def test_assess_modules_levels():
    usage = _usage([("numpy.testing.nosetester", IMPORT_CLOSURE), ("numpy.linalg", DIRECT)])
    issues = assess_modules(T, usage, {"numpy.testing.nosetester", "numpy.gone"})
    assert [(i.level, i.kind, i.entity) for i in issues] == [(TPL_TPL, MODULE, "numpy.testing.nosetester")]
    assert assess_modules(T, usage, set()) == []


def test_assess_api_names_raw_through_v1_map():
    raw = ApiUse("PIL.PILLOW_VERSION", site=("tv.py", 3))
    direct = ApiUse("PIL.Image.open", 1, frozenset(), ("p.py", 1), True)
    usage = _usage(apis=[(raw, CHAIN, True), (direct, DIRECT, False)])
    s2 = {"PIL._version.PILLOW_VERSION"}
    got = assess_api_names(T, usage, s2, {"PIL.PILLOW_VERSION": "PIL._version.PILLOW_VERSION"})
    assert [(i.level, i.entity) for i in got] == [(TPL_TPL, "PIL.PILLOW_VERSION")]
    assert assess_api_names(T, UsageSet(), s2) == []


# -- parameter mapping -------------------------------------------------------------

def test_identical_signatures_have_no_changes():
    assert diff_parameters(sig("a, b=1, *, c"), sig("a, b=1, *, c")) == []


def test_all_positionals_become_keyword_only():
    before = sig("y=None, sr=22050, S=None, n_fft=2048, hop_length=512")
    after = sig("*, y=None, sr=22050, S=None, n_fft=2048, hop_length=512")
    changes = diff_parameters(before, after)
    assert {c.change for c in changes} == {"kind-converted"}
    assert len(changes) == 5
    use = ApiUse("librosa.feature.melspectrogram", 5, frozenset(), ("a.py", 1), True)
    change, passing = assess_parameters(use, changes)
    assert (change.name, passing) == ("y", "by-position")
    assert assess_parameters(ApiUse("f", 0, frozenset(["sr"]), called=True), changes) is None


def test_rename_and_reorder_mapping():
    changes = diff_parameters(sig("x, y, flag=False"), sig("y, src, verbose=False, extra=1"))
    got = {(c.name, c.change, c.new_name, c.position_before, c.position_after) for c in changes}
    assert got == {
        ("y", "position-moved", None, 1, 0),
        ("x", "removed", None, 0, None),
        ("flag", "renamed", "verbose", 2, 2),
        ("src", "added-required", None, None, 1),
        ("extra", "added-defaulted", None, None, 3),
    }


def test_annotated_types_block_positional_rename():
    changes = diff_parameters(sig("a: int"), sig("b: str"))
    assert {c.change for c in changes} == {"removed", "added-required"}


def test_keyword_only_rename_needs_matching_annotation():
    assert [c.change for c in diff_parameters(sig("*, a: int = 0"), sig("*, b: int = 0"))] == ["renamed"]
    got = sorted(c.change for c in diff_parameters(sig("*, a=0"), sig("*, b=0")))
    assert got == ["added-defaulted", "removed"]


def test_all_defaulted_and_nothing_passed_is_compatible():
    changes = diff_parameters(sig("a=1"), sig("b=2, c=3"))
    assert assess_parameters(ApiUse("f", called=True), changes) is None


def test_variadics_absorb_removed_arguments():
    assert check_call(call(2), entry("a, b"), entry("a, *args")) is None
    assert check_call(call(0, ["b"]), entry("a=0, b=0"), entry("a=0, **kw")) is None
    assert check_call(call(2), entry("a, b"), entry("a")) is not None


def test_star_call_suppresses_added_required():
    use = ApiUse("m.f", 0, frozenset(), ("p.py", 1), True, star_args=True)
    assert check_call(use, entry("*args"), entry("a, *args")) is None


def test_overloads_any_compatible_pair_passes():
    one = entry("x")
    two = ApiEntry("function", 1, (sig("x, y"), sig("x")))
    assert check_call(call(1), one, two) is None
    assert check_call(call(1), one, ApiEntry("function", 1, (sig("x, y"), sig("*, x")))) is not None


# -- decision table -------------------------------------------------------------------

def test_decision_table_is_total():
    cells = set(itertools.product(KINDS, CHANGES, PASSINGS))
    assert set(DECISION_TABLE) == cells and len(cells) == 36


@pytest.mark.parametrize("cell", sorted(EXPECTED))
def test_decision_table_cell(cell):
    assert DECISION_TABLE[cell] == EXPECTED[cell]


@pytest.mark.parametrize("row", sorted(FIXTURES))
def test_micro_fixture_row(row):
    kind, change = row
    v1, v2, calls = FIXTURES[row]
    e1, e2 = entry(v1), entry(v2)
    changes = diff_parameters(e1.signatures[0], e2.signatures[0])
    assert change in {c.change for c in changes}
    for passing, use in calls.items():
        target = next(c for c in changes if c.change == change)
        assert passing_of(use, target) == passing
        assert (check_call(use, e1, e2) is None) == EXPECTED[(kind, change, passing)], (row, passing)


def test_dedupe_and_order():
    a = CompatIssue(TPL_TPL, API_NAME, "p", "1", "2", "p.x", "", ("f", 1))
    b = CompatIssue(PROJECT_TPL, MODULE, "p", "1", "2", "p.m", "")
    c = CompatIssue(PROJECT_TPL, API_PARAM, "p", "1", "2", "p.f", "", ("g", 2))
    assert dedupe([c, a, b, a]) == [b, a, c]


def test_param_change_kind_falls_back_to_new_kind():
    assert ParamChange("a", "added-required", None, "keyword-only").kind == "keyword-only"
