from __future__ import annotations

from ppg.cache import Cache, cached_rewrite, rewrite_key
from ppg.presentations import make_f1
from ppg.subgroups import rewrite_index_p

G = make_f1(3, 1, 2)
PHI = (0, 1, 0, 0)


def test_miss_then_hit(tmp_path):
    cache = Cache(tmp_path)
    first = cached_rewrite(G, PHI, cache)
    second = cached_rewrite(G, PHI, cache)
    assert (cache.stats.misses, cache.stats.hits) == (1, 1)
    assert second.relators == first.relators and second.expressions == first.expressions
    assert second.presentation.generators == rewrite_index_p(G, PHI).generators


def test_corrupt_entry_is_evicted(tmp_path):
    cache = Cache(tmp_path)
    cached_rewrite(G, PHI, cache)
    path = cache._path(rewrite_key(G, PHI))
    path.write_text(path.read_text().replace("x2", "x3", 1))
    again = cached_rewrite(G, PHI, cache)
    assert cache.stats.evictions == 1
    assert again.relators == rewrite_index_p(G, PHI).relators
    # recomputed and stored again
    cached_rewrite(G, PHI, cache)
    assert cache.stats.hits == 1


def test_disabled_cache():
    assert cached_rewrite(G, PHI, None).relators == rewrite_index_p(G, PHI).relators
