"""Client for the package index JSON API (``/pypi/<name>/json``)."""

from __future__ import annotations

import json
import logging
import time
import urllib.error
import urllib.parse
import urllib.request
from typing import Any

from ..errors import IndexUnavailable, UnknownPackage

log = logging.getLogger(__name__)

DEFAULT_INDEX = "https://pypi.org"


class IndexClient:
    """Fetches project and release documents.

    *base_url* may be ``http(s)://`` or ``file://``; a file mirror is simply a
    directory tree laid out like the JSON endpoints.
    """

    def __init__(self, base_url: str = DEFAULT_INDEX, retries: int = 3, backoff: float = 0.5,
                 timeout: float = 30.0):
        self.base_url = base_url.rstrip("/") + "/"
        self.retries = retries
        self.backoff = backoff
        self.timeout = timeout

    def url(self, *parts: str) -> str:
        return urllib.parse.urljoin(self.base_url, "/".join(urllib.parse.quote(p) for p in parts))

    def project(self, name: str) -> dict[str, Any]:
        return self.get_json(self.url("pypi", name, "json"), name)

    def release(self, name: str, version: str) -> dict[str, Any]:
        return self.get_json(self.url("pypi", name, version, "json"), name)

    def get_json(self, url: str, pkg: str) -> dict[str, Any]:
        return json.loads(self.get_bytes(url, pkg).decode("utf-8"))

    def get_bytes(self, url: str, pkg: str) -> bytes:
        url = urllib.parse.urljoin(self.base_url, url)
        last: Exception | None = None
        for attempt in range(self.retries):
            try:
                with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                    return resp.read()
            except urllib.error.HTTPError as exc:
                if exc.code == 404:
                    raise UnknownPackage(pkg) from None
                last = exc
            except FileNotFoundError:
                raise UnknownPackage(pkg) from None
            except urllib.error.URLError as exc:
                if isinstance(exc.reason, FileNotFoundError):
                    raise UnknownPackage(pkg) from None
                last = exc
            except OSError as exc:
                last = exc
            if attempt + 1 < self.retries:
                delay = self.backoff * 2**attempt
                log.debug("retrying %s in %.1fs (%s)", url, delay, last)
                time.sleep(delay)
        raise IndexUnavailable(pkg, str(last))
