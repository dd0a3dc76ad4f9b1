"""On-disk result cache keyed by a content hash of (operation, inputs).

Entries are written once via a temporary file and an atomic rename, so
concurrent writers of the same key leave one complete, identical file.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import time
from pathlib import Path
from typing import Any, Callable

from .core import to_jsonable

log = logging.getLogger("heightlab.cache")

ENV_VAR = "HEIGHTLAB_CACHE"


def canonical_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def cache_key(operation: str, inputs: Any) -> str:
    blob = canonical_json({"operation": operation, "inputs": inputs})
    return hashlib.sha256(blob.encode()).hexdigest()


def resolve_cache_dir(flag: str | None, disabled: bool = False) -> Path | None:
    """--cache-dir wins, then $HEIGHTLAB_CACHE; no directory means no cache."""
    if disabled:
        return None
    path = flag or os.environ.get(ENV_VAR)
    return Path(path) if path else None


class Cache:
    def __init__(self, directory: str | Path | None):
        self.directory = Path(directory) if directory else None
        self.hits = 0
        self.misses = 0

    @property
    def enabled(self) -> bool:
        return self.directory is not None

    def _path(self, key: str) -> Path:
        return self.directory / key[:2] / f"{key}.json"

    def get(self, key: str) -> Any | None:
        if not self.enabled:
            return None
        path = self._path(key)
        try:
            with open(path) as fh:
                entry = json.load(fh)
            if entry.get("key") != key or "value" not in entry:
                raise ValueError("malformed entry")
            return entry["value"]
        except FileNotFoundError:
            return None
        except (OSError, ValueError) as exc:
            log.warning("ignoring unreadable cache entry %s: %s", path, exc)
            return None

    def put(self, key: str, value: Any) -> None:
        if not self.enabled:
            return
        path = self._path(key)
        entry = {"key": key, "created": time.time(), "value": to_jsonable(value)}
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
            try:
                with os.fdopen(fd, "w") as fh:
                    json.dump(entry, fh, sort_keys=True)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
        except OSError as exc:
            log.warning("cache write failed for %s: %s", path, exc)

    def get_put(self, operation: str, inputs: Any, compute: Callable[[], Any]) -> Any:
        """Cached value on an exact key hit, otherwise compute, store and return.

        Values are round-tripped through JSON either way so that cached and
        fresh results are identical.
        """
        key = cache_key(operation, inputs)
        hit = self.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        self.misses += 1
        value = json.loads(json.dumps(to_jsonable(compute())))
        self.put(key, value)
        return value
