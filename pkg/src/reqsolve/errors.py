"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class ReqsolveError(Exception):
    """Base class for all errors raised by reqsolve."""


class MalformedVersion(ReqsolveError, ValueError):
    def __init__(self, text: str):
        super().__init__(f"malformed version: {text!r}")
        self.text = text


class MalformedSpecifier(ReqsolveError, ValueError):
    def __init__(self, text: str):
        super().__init__(f"malformed specifier: {text!r}")
        self.text = text


class MalformedRequirement(ReqsolveError, ValueError):
    def __init__(self, line: str, reason: str = "expected 'name==version'"):
        super().__init__(f"malformed requirement {line!r}: {reason}")
        self.line = line


class DuplicatePackage(ReqsolveError, ValueError):
    def __init__(self, name: str):
        super().__init__(f"package listed more than once: {name}")
        self.name = name


# knowledge acquisition

class IndexUnavailable(ReqsolveError):
    def __init__(self, pkg: str, reason: str = ""):
        msg = f"no index data for {pkg!r}"
        super().__init__(f"{msg}: {reason}" if reason else msg)
        self.pkg = pkg


class UnknownPackage(ReqsolveError):
    def __init__(self, pkg: str):
        super().__init__(f"package not found on index: {pkg!r}")
        self.pkg = pkg


class MetadataMissing(ReqsolveError):
    def __init__(self, pkg: str, version: str):
        super().__init__(f"no metadata for {pkg}=={version}")
        self.pkg = pkg
        self.version = version


class SourceUnavailable(ReqsolveError):
    def __init__(self, pkg: str, version: str, reason: str = ""):
        msg = f"no source archive for {pkg}=={version}"
        super().__init__(f"{msg}: {reason}" if reason else msg)
        self.pkg = pkg
        self.version = version


# solving

class TargetVersionUnknown(ReqsolveError):
    def __init__(self, pkg: str, version: str):
        super().__init__(f"{pkg}=={version} is not a candidate version")
        self.pkg = pkg
        self.version = version


class UnsatisfiablePin(ReqsolveError):
    def __init__(self, pkg: str, version: str):
        super().__init__(f"pinned {pkg}=={version} is not among the candidates")
        self.pkg = pkg
        self.version = version


# strategy

class NoPlan(ReqsolveError):
    def __init__(self, pkg: str):
        super().__init__(f"no alternative candidate versions for {pkg}")
        self.pkg = pkg


class CompletionUnsatisfiable(ReqsolveError):
    def __init__(self, pkg: str, spec: str):
        super().__init__(f"no candidate of {pkg} satisfies {spec!r}")
        self.pkg = pkg
        self.spec = spec


# configuration

class ConfigInvalid(ReqsolveError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"invalid config field {field!r}: {reason}")
        self.field = field
        self.reason = reason


class PinMismatch(ReqsolveError):
    def __init__(self, target: str, declared: str, found: str | None):
        super().__init__(
            f"config declares {target}=={declared} but requirements pin {found or 'nothing'}"
        )
        self.target = target
        self.declared = declared
        self.found = found
