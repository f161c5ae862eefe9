import itertools

import pytest
from hypothesis import given, strategies as st

from reqsolve.errors import DuplicatePackage, MalformedRequirement, MalformedVersion
from reqsolve.versioning import (
    normalize_name,
    parse_requirements,
    parse_specifier,
    parse_version,
    render_requirements,
    satisfies,
)


def test_parse_version_release_tuple():
    assert parse_version("1.4.0").release == (1, 4, 0)
    assert parse_version("0").release == (0,)


@pytest.mark.parametrize("bad", ["", "   ", "not-a-version", "1..2", "v1.0-foo-bar"])
def test_parse_version_rejects_junk(bad):
    with pytest.raises(MalformedVersion):
        parse_version(bad)


# Orderings below were worked out by hand from the PEP 440 rules
# (dev < pre < final < post; numeric, not lexical, release comparison).
FROZEN_ORDERS = [
    ["1.9.0rc1", "1.9.0", "1.10.0"],
    ["0.0.12", "0.1", "0.5.0", "0.10.0"],
    ["1.0.dev0", "1.0a1", "1.0b2", "1.0rc1", "1.0", "1.0.post1", "1.1"],
    ["2.6.2", "2.6.2.2", "2.6.10"],
    ["1.14.5", "1.16.4", "1.18.0", "1.19.5", "1.24.0"],
    ["9.0.0", "1!0.1"],
]


@pytest.mark.parametrize("order", FROZEN_ORDERS)
def test_version_order_matches_hand_computed(order):
    parsed = [parse_version(v) for v in order]
    for shuffled in itertools.permutations(parsed):
        assert sorted(shuffled) == parsed


def test_version_total_order_over_corpus():
    corpus = [parse_version(v) for order in FROZEN_ORDERS for v in order]
    for a, b in itertools.product(corpus, repeat=2):
        assert sum([a < b, a == b, a > b]) == 1
    for a, b, c in itertools.product(corpus[:12], repeat=3):
        if a < b and b < c:
            assert a < c


def test_version_render_roundtrip():
    for order in FROZEN_ORDERS:
        for text in order:
            v = parse_version(text)
            assert parse_version(str(v)) == v


def test_satisfies_examples():
    assert satisfies(parse_version("1.4.0"), "==1.4.0")
    assert satisfies(parse_version("1.6.0"), "")
    assert satisfies(parse_version("1.14.5"), "<=1.14.5,>=1.13.3")
    assert not satisfies(parse_version("1.19.5"), "<=1.14.5,>=1.13.3")
    assert satisfies(parse_version("1.2.3"), "~=1.2")
    assert not satisfies(parse_version("2.0"), "~=1.2")
    assert not satisfies(parse_version("1.0"), "!=1.0")
    # metadata style with parentheses
    assert satisfies(parse_version("1.14.0"), parse_specifier("(>=1.13.3,<=1.14.5)"))


VERSIONS = st.builds(
    lambda rel, pre: ".".join(map(str, rel)) + pre,
    st.lists(st.integers(0, 20), min_size=1, max_size=4),
    st.sampled_from(["", "a1", "rc2", ".post1", ".dev3"]),
)


@given(VERSIONS, VERSIONS, VERSIONS)
def test_satisfies_lower_bound_monotone(a, b, c):
    va, vb, vc = map(parse_version, (a, b, c))
    spec = f">={va}"
    lo, hi = sorted([vb, vc])
    if satisfies(lo, spec):
        assert satisfies(hi, spec)


def test_parse_requirements_basic():
    reqs = parse_requirements("torch==1.6.0\ntorchvision==0.7.0")
    assert list(reqs) == ["torch", "torchvision"]
    assert reqs["torch"] == parse_version("1.6.0")
    assert parse_requirements("") == {}


def test_parse_requirements_comments_and_crlf():
    text = "# header\r\n\r\nnumpy==1.16.4  # inline\r\nscipy == 1.2.1\r\n"
    assert parse_requirements(text) == {"numpy": parse_version("1.16.4"), "scipy": parse_version("1.2.1")}


def test_name_normalization():
    # PEP 503 applied by hand
    fixtures = {"Pillow": "pillow", "scikit_learn": "scikit-learn", "Foo.Bar--baz": "foo-bar-baz",
                "zope.interface": "zope-interface", "A__B": "a-b"}
    for raw, expected in fixtures.items():
        assert normalize_name(raw) == expected
        assert normalize_name(normalize_name(raw)) == expected
    assert parse_requirements("Pillow==6.2.0") == parse_requirements("pillow==6.2.0")


@pytest.mark.parametrize("line", ["torch>=1.6", "torch", "torch==1.6.0; python_version<'3.8'",
                                  "torch[cuda]==1.6.0", "-r other.txt", "torch~=1.6"])
def test_parse_requirements_rejects_non_pins(line):
    with pytest.raises(MalformedRequirement):
        parse_requirements(line)


def test_parse_requirements_duplicate():
    with pytest.raises(DuplicatePackage):
        parse_requirements("Pillow==6.2.0\npillow==7.0.0")


def test_render_requirements():
    assert render_requirements(parse_requirements("torch==1.6.0")) == "torch==1.6.0\n"
    assert render_requirements({}) == ""


NAMES = st.from_regex(r"[a-z][a-z0-9]{0,6}([-_.][a-z0-9]{1,4})?", fullmatch=True)


@given(st.dictionaries(NAMES, VERSIONS, max_size=8))
def test_requirements_roundtrip(pins):
    reqs = {}
    for name, ver in pins.items():
        reqs.setdefault(normalize_name(name), parse_version(ver))
    text = render_requirements(reqs)
    assert parse_requirements(text) == reqs
    assert list(parse_requirements(text)) == list(reqs)
