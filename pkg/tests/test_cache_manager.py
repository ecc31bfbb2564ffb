"""Tests for the memo cache."""
from concurrent.futures import ThreadPoolExecutor

from src.core.cache_manager import CacheManager, get_susceptibility_cache


def test_hits_and_misses():
    cache = CacheManager()
    assert cache.get("a", 1) is None
    cache.set(2.5, "a", 1)
    assert cache.get("a", 1) == 2.5
    stats = cache.stats
    assert (stats.hits, stats.misses, stats.size) == (1, 1, 1)


def test_first_value_wins():
    cache = CacheManager()
    cache.set(1.0, "k")
    cache.set(2.0, "k")
    assert cache.get("k") == 1.0


def test_oldest_entry_is_evicted():
    cache = CacheManager(max_entries=2)
    for i in range(3):
        cache.set(i, i)
    assert cache.get(0) is None
    assert cache.get(2) == 2
    assert cache.stats.size == 2


def test_disabled_cache_stores_nothing():
    cache = CacheManager(enabled=False)
    cache.set(1.0, "k")
    assert cache.get("k") is None
    cache.enabled = True
    assert cache.stats.size == 0


def test_clear_resets_counters():
    cache = CacheManager()
    cache.set(1.0, "k")
    cache.get("k")
    cache.clear()
    stats = cache.stats
    assert (stats.hits, stats.misses, stats.size) == (0, 0, 0)


def test_concurrent_writers():
    cache = CacheManager()
    with ThreadPoolExecutor(max_workers=4) as executor:
        list(executor.map(lambda i: cache.set(i * i, i % 50), range(400)))
    assert cache.stats.size == 50
    assert all(cache.get(i) is not None for i in range(50))


def test_shared_cache_is_a_singleton():
    assert get_susceptibility_cache() is get_susceptibility_cache()
