"""Local knowledge cache: candidate versions, dependency metadata and code inventories.

Layout under ``knowledge_path``::

    {name}/versions.json
    {name}/{version}/meta.json
    {name}/{version}/modules.json
    {name}/{version}/apis.json
    {name}/{version}/simplify.json
    {name}/{version}/src/            unpacked source archive
"""

from __future__ import annotations

import io
import json
import logging
import os
import shutil
import tarfile
import tempfile
import threading
import zipfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

from packaging.markers import InvalidMarker, UndefinedEnvironmentName
from packaging.requirements import InvalidRequirement, Requirement

from .._astutil import import_root
from ..errors import IndexUnavailable, MetadataMissing, SourceUnavailable, UnknownPackage
from ..versioning import SpecifierSet, Version, normalize_name, parse_specifier, try_parse_version
from .index import IndexClient
from .inventory import ApiEntry, ApiInventory, ModuleInventory, build_api_inventory, build_module_inventory

log = logging.getLogger(__name__)

Dependency = tuple[str, SpecifierSet]


def _dump(path: Path, data: Any) -> None:
    """Atomic write-then-rename; sorted keys keep cache files byte-stable."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _load(path: Path) -> Any | None:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        return None
    except (json.JSONDecodeError, UnicodeDecodeError):
        log.warning("corrupt cache file %s; rebuilding", path)
        return None


@dataclass(frozen=True)
class Knowledge:
    """Everything known about one (package, version)."""

    modules: ModuleInventory
    apis: ApiInventory
    simplify: dict[str, str]
    dependencies: list[Dependency]


class KnowledgeStore:
    def __init__(self, knowledge_path: str | Path, index: IndexClient | None = None,
                 python_version: str = "3.10", offline: bool = False,
                 aliases: Mapping[str, Iterable[str]] | None = None):
        self.root = Path(knowledge_path)
        self.index = index if index is not None else IndexClient()
        self.python_version = python_version
        self.offline = offline
        self.aliases = {normalize_name(k): sorted(v) if not isinstance(v, str) else [v]
                        for k, v in (aliases or {}).items()}
        self.network_calls = 0
        self._lock = threading.RLock()
        self._pkg_locks: dict[tuple[str, str], threading.Lock] = {}
        self._releases: dict[str, dict[str, Any]] = {}
        self._knowledge: dict[tuple[str, str], Knowledge] = {}

    # -- paths ---------------------------------------------------------------

    def _pkg_dir(self, pkg: str) -> Path:
        return self.root / normalize_name(pkg)

    def _ver_dir(self, pkg: str, version: Version | str) -> Path:
        return self._pkg_dir(pkg) / str(version)

    def _fetch(self, what: str, fn, *args):
        if self.offline:
            raise IndexUnavailable(args[0], f"offline and {what} not cached")
        with self._lock:
            self.network_calls += 1
        return fn(*args)

    # -- versions ------------------------------------------------------------

    def _release_table(self, pkg: str) -> dict[str, Any]:
        pkg = normalize_name(pkg)
        with self._lock:
            if pkg in self._releases:
                return self._releases[pkg]
        path = self._pkg_dir(pkg) / "versions.json"
        data = _load(path)
        if not isinstance(data, dict) or not isinstance(data.get("releases"), dict):
            doc = self._fetch("versions", self.index.project, pkg)
            data = {"name": pkg, "releases": _release_table_from_project(doc)}
            _dump(path, data)
        with self._lock:
            self._releases[pkg] = data
        return data

    def fetch_candidates(self, pkg: str, include: Iterable[Version] = ()) -> list[Version]:
        """Ascending versions whose requires-python admits the configured interpreter.

        Pre-releases are dropped unless listed in *include*.
        """
        releases = self._release_table(pkg)["releases"]
        include = set(include)
        py = Version(self.python_version)
        out = set()
        for text, info in releases.items():
            v = try_parse_version(text)
            if v is None:
                continue
            if v.is_prerelease and v not in include:
                continue
            req_py = (info or {}).get("requires_python")
            if req_py:
                try:
                    if not parse_specifier(req_py).contains(py, prereleases=True):
                        continue
                except Exception:
                    log.warning("ignoring bad requires_python %r on %s %s", req_py, pkg, text)
            out.add(v)
        return sorted(out)

    def known_package(self, pkg: str) -> bool:
        try:
            self._release_table(pkg)
            return True
        except (UnknownPackage, IndexUnavailable):
            return False

    # -- metadata ------------------------------------------------------------

    def _meta(self, pkg: str, version: Version | str) -> dict[str, Any]:
        path = self._ver_dir(pkg, version) / "meta.json"
        data = _load(path)
        if not isinstance(data, dict) or "requires_dist" not in data:
            try:
                doc = self._fetch("metadata", self.index.release, normalize_name(pkg), str(version))
            except UnknownPackage:
                raise MetadataMissing(pkg, str(version)) from None
            info = doc.get("info") or {}
            sdist = [u for u in doc.get("urls", []) if u.get("packagetype") == "sdist"]
            wheels = [u for u in doc.get("urls", []) if u.get("packagetype") == "bdist_wheel"]
            chosen = (sdist or wheels or [None])[0]
            data = {
                "name": normalize_name(pkg),
                "version": str(version),
                "requires_dist": list(info.get("requires_dist") or []),
                "requires_python": info.get("requires_python"),
                "source_url": chosen.get("url") if chosen else None,
                "source_filename": chosen.get("filename") if chosen else None,
            }
            _dump(path, data)
        return data

    def fetch_dependencies(self, pkg: str, version: Version | str) -> list[Dependency]:
        meta = self._meta(pkg, version)
        env = {"python_version": self.python_version, "python_full_version": self.python_version + ".0",
               "extra": ""}
        deps: dict[str, SpecifierSet] = {}
        for line in meta["requires_dist"]:
            try:
                req = Requirement(line)
            except InvalidRequirement:
                log.warning("skipping unparseable requirement %r of %s %s", line, pkg, version)
                continue
            if req.marker is not None:
                try:
                    if "extra" in str(req.marker) or not req.marker.evaluate(env):
                        continue
                except (InvalidMarker, UndefinedEnvironmentName):
                    continue
            name = normalize_name(req.name)
            spec = SpecifierSet(str(req.specifier), prereleases=True)
            if name in deps:
                spec = SpecifierSet(str(deps[name] & spec), prereleases=True)
            deps[name] = spec
        return sorted(deps.items())

    # -- source --------------------------------------------------------------

    def source_dir(self, pkg: str, version: Version | str) -> Path:
        """Unpacked source tree (downloading it if needed)."""
        dest = self._ver_dir(pkg, version) / "src"
        if (dest / ".complete").exists():
            return dest
        meta = self._meta(pkg, version)
        url = meta.get("source_url")
        if not url:
            raise SourceUnavailable(pkg, str(version), "no sdist or wheel listed")
        if self.offline:
            raise SourceUnavailable(pkg, str(version), "offline and source not cached")
        with self._lock:
            self.network_calls += 1
        try:
            blob = self.index.get_bytes(url, pkg)
        except (UnknownPackage, IndexUnavailable) as exc:
            raise SourceUnavailable(pkg, str(version), str(exc)) from None
        tmp = Path(tempfile.mkdtemp(dir=dest.parent, prefix=".src-"))
        try:
            _unpack(blob, meta.get("source_filename") or url, tmp)
            entries = [p for p in tmp.iterdir()]
            # sdists wrap everything in "<name>-<version>/"
            top = entries[0] if len(entries) == 1 and entries[0].is_dir() else tmp
            if dest.exists():
                shutil.rmtree(dest)
            shutil.move(str(top), str(dest))
            (dest / ".complete").write_text("")
        finally:
            shutil.rmtree(tmp, ignore_errors=True)
        return dest

    def import_root(self, pkg: str, version: Version | str) -> Path:
        return import_root(self.source_dir(pkg, version))

    # -- inventories ---------------------------------------------------------

    def load_or_refresh(self, pkg: str, version: Version | str) -> Knowledge:
        pkg = normalize_name(pkg)
        key = (pkg, str(version))
        with self._lock:
            if key in self._knowledge:
                return self._knowledge[key]
            lock = self._pkg_locks.setdefault(key, threading.Lock())
        with lock:
            with self._lock:
                if key in self._knowledge:
                    return self._knowledge[key]
            knowledge = self._load_inventories(pkg, version)
            with self._lock:
                self._knowledge[key] = knowledge
            return knowledge

    def _load_inventories(self, pkg: str, version: Version | str) -> Knowledge:
        vdir = self._ver_dir(pkg, version)
        deps = self.fetch_dependencies(pkg, version)
        mods = _load(vdir / "modules.json")
        apis = _load(vdir / "apis.json")
        simp = _load(vdir / "simplify.json")
        try:
            modules = ModuleInventory(pkg, str(version), frozenset(mods["Modules"]))
            api_inv = ApiInventory(pkg, str(version),
                                   {k: ApiEntry.from_json(v) for k, v in apis["APIs"].items()},
                                   list(apis.get("ParseFailures", [])))
            simplify = dict(simp["Simplify"])
        except (TypeError, KeyError, ValueError):
            src = self.source_dir(pkg, version)
            modules = build_module_inventory(src, pkg, str(version))
            api_inv, simplify = build_api_inventory(src, pkg, str(version), modules.modules)
            _dump(vdir / "modules.json", modules.to_json())
            _dump(vdir / "apis.json", api_inv.to_json())
            _dump(vdir / "simplify.json", {"Simplify": simplify})
        return Knowledge(modules, api_inv, simplify, deps)

    def modules(self, pkg: str, version: Version | str) -> ModuleInventory:
        return self.load_or_refresh(pkg, version).modules

    def apis(self, pkg: str, version: Version | str) -> ApiInventory:
        return self.load_or_refresh(pkg, version).apis

    def simplify(self, pkg: str, version: Version | str) -> dict[str, str]:
        return self.load_or_refresh(pkg, version).simplify

    def import_names(self, pkg: str, version: Version | str | None = None) -> list[str]:
        """Top-level import names of *pkg*: alias table first, else its module inventory."""
        pkg = normalize_name(pkg)
        if pkg in self.aliases:
            return list(self.aliases[pkg])
        if version is not None:
            try:
                tops = sorted({m.split(".", 1)[0] for m in self.modules(pkg, version).modules})
            except (SourceUnavailable, MetadataMissing, IndexUnavailable, UnknownPackage):
                tops = []
            if tops:
                return tops
        return [pkg.replace("-", "_")]

    def prefetch(self, pairs: Iterable[tuple[str, Version | str]], workers: int = 4) -> list[Exception]:
        """Warm the cache for many (package, version) pairs with bounded parallelism."""
        errors: list[Exception] = []

        def one(pair):
            try:
                self.load_or_refresh(*pair)
            except Exception as exc:  # collected for the caller
                errors.append(exc)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, sorted(set((normalize_name(p), str(v)) for p, v in pairs))))
        return errors


def _release_table_from_project(doc: dict[str, Any]) -> dict[str, Any]:
    table: dict[str, Any] = {}
    for version, files in (doc.get("releases") or {}).items():
        files = [f for f in files or [] if not f.get("yanked")]
        if not files:
            continue
        req_py = next((f.get("requires_python") for f in files if f.get("requires_python")), None)
        table[version] = {"requires_python": req_py}
    return table


def _unpack(blob: bytes, filename: str, dest: Path) -> None:
    name = filename.lower()
    if name.endswith((".zip", ".whl")):
        with zipfile.ZipFile(io.BytesIO(blob)) as zf:
            for member in zf.namelist():
                target = (dest / member).resolve()
                if not str(target).startswith(str(dest.resolve())):
                    raise SourceUnavailable(filename, "", f"unsafe path {member}")
            zf.extractall(dest)
    else:
        with tarfile.open(fileobj=io.BytesIO(blob), mode="r:*") as tf:
            if hasattr(tarfile, "data_filter"):
                tf.extractall(dest, filter="data")
            else:  # pragma: no cover - very old interpreters
                tf.extractall(dest)
