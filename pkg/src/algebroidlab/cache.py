"""Content-addressed result cache for command-line task runs.

Keys hash the manifest text, the task name, the effective run parameters,
and the package version, so a hit can never change what a run would have
reported.  Values are the JSON task entries that go into reports.
"""

from __future__ import annotations

import hashlib
import json
import os

ENV_VAR = "ALGEBROIDLAB_CACHE_DIR"
DEFAULT_DIRNAME = ".algebroidlab-cache"


def cache_key(parts: dict) -> str:
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def resolve_cache_dir(flag_value=None) -> str:
    """Flag beats environment beats the project-local default."""
    if flag_value:
        return flag_value
    env = os.environ.get(ENV_VAR)
    if env:
        return env
    return DEFAULT_DIRNAME


class ResultCache:
    def __init__(self, root: str):
        self.root = root

    def _path(self, key: str) -> str:
        return os.path.join(self.root, key + ".json")

    def get(self, key: str):
        try:
            with open(self._path(key), "r", encoding="utf-8") as handle:
                return json.load(handle)
        except (OSError, ValueError):
            return None

    def put(self, key: str, value) -> None:
        os.makedirs(self.root, exist_ok=True)
        tmp = self._path(key) + ".tmp"
        with open(tmp, "w", encoding="utf-8") as handle:
            json.dump(value, handle, sort_keys=True)
        os.replace(tmp, self._path(key))
