"""Content-addressed store for subgroup rewrites.

Entries live under ``$PPG_CACHE`` (or an explicit directory) as JSON files
named by the sha256 of their key.  Each entry records the hash of its
payload; a lookup that fails to parse or whose hash does not match evicts
the entry and reports a miss, so the caller recomputes.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .presentations import Family, Presentation
from .subgroups import SubgroupPresentation, rewrite_index_p
from .words import parse_word

__all__ = ["Cache", "CacheStats", "rewrite_key", "cached_rewrite", "default_cache"]

ENV_VAR = "PPG_CACHE"


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    evictions: int = 0


class Cache:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.stats = CacheStats()

    def _path(self, key: str) -> Path:
        digest = _sha(key)
        return self.root / digest[:2] / f"{digest}.json"

    def put(self, key: str, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True)
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"key": key, "sha256": _sha(body), "payload": body}), encoding="utf-8")
        tmp.replace(path)

    def get(self, key: str) -> dict | None:
        path = self._path(key)
        if not path.exists():
            self.stats.misses += 1
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            body = entry["payload"]
            if entry["key"] != key or _sha(body) != entry["sha256"]:
                raise ValueError("hash mismatch")
            payload = json.loads(body)
        except (ValueError, KeyError, TypeError, UnicodeDecodeError):
            path.unlink(missing_ok=True)
            self.stats.evictions += 1
            self.stats.misses += 1
            return None
        self.stats.hits += 1
        return payload


def default_cache() -> Cache | None:
    root = os.environ.get(ENV_VAR)
    return Cache(root) if root else None


def rewrite_key(pres: Presentation, phi) -> str:
    return f"rewrite:{pres.digest()}:{','.join(str(int(a)) for a in phi)}"


def cached_rewrite(pres, phi, cache: Cache | None) -> SubgroupPresentation:
    """``rewrite_index_p`` through the cache.  Rewrites of subgroups (towers)
    and calls with ``cache=None`` are computed directly."""
    if cache is None or isinstance(pres, SubgroupPresentation):
        return rewrite_index_p(pres, phi)
    key = rewrite_key(pres, phi)
    hit = cache.get(key)
    if hit is not None:
        try:
            return _restore(pres, hit)
        except (ValueError, KeyError, TypeError):
            cache.stats.evictions += 1
    sub = rewrite_index_p(pres, phi)
    cache.put(key, {
        "phi": list(sub.phi),
        "transversal": sub.transversal,
        "generators": list(sub.generators),
        "relators": [str(r) for r in sub.relators],
        "expressions": [str(e) for e in sub.expressions],
    })
    return sub


def _restore(parent: Presentation, entry: dict) -> SubgroupPresentation:
    gens = tuple(entry["generators"])
    phi = tuple(int(a) for a in entry["phi"])
    rels = tuple(parse_word(t, gens) for t in entry["relators"])
    exprs = tuple(parse_word(t, parent.generators) for t in entry["expressions"])
    if len(exprs) != len(gens):
        raise ValueError("cached rewrite is inconsistent")
    P = Presentation(parent.p, gens, rels, Family("subgroup", (str(parent.family), phi)),
                     name=f"{parent.name}_ker")
    return SubgroupPresentation(parent, phi, entry["transversal"], exprs, P, (phi,), parent, exprs)
