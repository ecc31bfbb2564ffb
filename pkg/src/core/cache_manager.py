"""
Cache Manager Module
=====================
Thread-safe in-memory memoization for expensive steady-state solves.
Entries are immutable after insertion; a lock guards the table so trial
workers can share one cache.
"""
import threading
from dataclasses import dataclass
from typing import Any, Dict, Hashable, Optional


@dataclass(frozen=True)
class CacheStats:
    """Hit/miss counters of a cache."""
    hits: int
    misses: int
    size: int


class CacheManager:
    """
    Bounded memo table keyed by hashable tuples.

    When the table is full the oldest entry is evicted (insertion order).
    """

    def __init__(self, max_entries: int = 4096, enabled: bool = True):
        """
        Initialize CacheManager.

        Args:
            max_entries: Maximum number of stored results
            enabled: Whether caching is enabled
        """
        self._table: Dict[Hashable, Any] = {}
        self._lock = threading.Lock()
        self._max_entries = max_entries
        self._enabled = enabled
        self._hits = 0
        self._misses = 0

    def get(self, *key_parts: Hashable) -> Optional[Any]:
        """
        Get a cached value.

        Args:
            *key_parts: Key components (e.g. atomic system, optics, omega_rf)

        Returns:
            Cached value or None if absent
        """
        if not self._enabled:
            return None
        with self._lock:
            if key_parts in self._table:
                self._hits += 1
                return self._table[key_parts]
            self._misses += 1
            return None

    def set(self, value: Any, *key_parts: Hashable) -> None:
        """Store a value; an existing entry for the key is kept."""
        if not self._enabled:
            return
        with self._lock:
            if key_parts in self._table:
                return
            if len(self._table) >= self._max_entries:
                self._table.pop(next(iter(self._table)))
            self._table[key_parts] = value

    def clear(self) -> None:
        """Drop all entries and reset the counters."""
        with self._lock:
            self._table.clear()
            self._hits = 0
            self._misses = 0

    @property
    def stats(self) -> CacheStats:
        with self._lock:
            return CacheStats(self._hits, self._misses, len(self._table))

    @property
    def enabled(self) -> bool:
        """Check if caching is enabled."""
        return self._enabled

    @enabled.setter
    def enabled(self, value: bool) -> None:
        """Enable or disable caching."""
        self._enabled = value


# Shared susceptibility cache (lazy initialization)
_susceptibility_cache: Optional[CacheManager] = None


def get_susceptibility_cache() -> CacheManager:
    """Get the process-wide susceptibility cache."""
    global _susceptibility_cache
    if _susceptibility_cache is None:
        _susceptibility_cache = CacheManager()
    return _susceptibility_cache
