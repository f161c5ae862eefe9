"""Version identifiers, constraint specifiers and pinned requirements files.

Versions and specifiers follow PEP 440 and are backed by :mod:`packaging`;
package names are compared in their PEP 503 normalized form.  A requirements
file here is always *fully pinned*: one ``name==version`` per line.
"""

from __future__ import annotations

import logging
import re
from typing import Iterable, Mapping

from packaging.specifiers import InvalidSpecifier, SpecifierSet
from packaging.utils import canonicalize_name
from packaging.version import InvalidVersion, Version

from .errors import DuplicatePackage, MalformedRequirement, MalformedSpecifier, MalformedVersion

__all__ = [
    "Version",
    "Specifier",
    "Requirements",
    "normalize_name",
    "parse_version",
    "try_parse_version",
    "parse_specifier",
    "satisfies",
    "parse_requirements",
    "render_requirements",
]

log = logging.getLogger(__name__)

Specifier = SpecifierSet
# ordered map of normalized package name -> pinned version
Requirements = dict[str, Version]

_PIN_RE = re.compile(r"^(?P<name>[A-Za-z0-9](?:[A-Za-z0-9._-]*[A-Za-z0-9])?)\s*==\s*(?P<version>\S+)$")


def normalize_name(name: str) -> str:
    """PEP 503 normalization: lowercase, runs of ``-_.`` collapsed to ``-``."""
    return canonicalize_name(name)


def parse_version(text: str) -> Version:
    if not text or not text.strip():
        raise MalformedVersion(text)
    try:
        return Version(text.strip())
    except InvalidVersion:
        raise MalformedVersion(text) from None


def try_parse_version(text: str) -> Version | None:
    """Like :func:`parse_version` but logs and returns None on junk input."""
    try:
        return parse_version(text)
    except MalformedVersion:
        log.warning("skipping unparseable version %r", text)
        return None


def parse_specifier(text: str | None) -> SpecifierSet:
    text = (text or "").strip()
    # PyPI metadata sometimes wraps the specifier in parentheses: "numpy (>=1.13)"
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1].strip()
    try:
        return SpecifierSet(text, prereleases=True)
    except InvalidSpecifier:
        raise MalformedSpecifier(text) from None


def satisfies(version: Version, spec: SpecifierSet | str) -> bool:
    """True iff *version* meets every clause of *spec*.

    Pre-releases are judged purely by comparison; whether a pre-release is a
    candidate at all is decided when candidate lists are built.
    """
    if isinstance(spec, str):
        spec = parse_specifier(spec)
    return spec.contains(version, prereleases=True)


def parse_requirements(text: str) -> Requirements:
    reqs: Requirements = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _PIN_RE.match(line)
        if m is None:
            raise MalformedRequirement(raw.strip())
        name = normalize_name(m.group("name"))
        try:
            version = parse_version(m.group("version"))
        except MalformedVersion:
            raise MalformedRequirement(raw.strip(), "unparseable version") from None
        if name in reqs:
            raise DuplicatePackage(name)
        reqs[name] = version
    return reqs


def render_requirements(reqs: Mapping[str, Version]) -> str:
    return "".join(f"{name}=={version}\n" for name, version in reqs.items())


def sorted_versions(versions: Iterable[Version]) -> list[Version]:
    """Ascending, duplicate-free."""
    return sorted(set(versions))
