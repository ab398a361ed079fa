import time
import threading
from typing import Any, Callable, Dict, List, Optional
import logging

logger = logging.getLogger(__name__)

class CacheItem:
    def __init__(self, value: Any):
        self.value = value
        self.created_at = time.time()
        self.hits = 0

class CacheManager:
    """Bounded, lock-protected memo table.

    Values are treated as read-only once stored. Growable tables (lists that
    are extended in place) must be grown through ``grow`` so the extension
    happens under the lock.
    """

    def __init__(self, name: str, max_size: int = 64):
        self.name = name
        self._cache: Dict[str, CacheItem] = {}
        self._lock = threading.RLock()
        self._max_size = max_size
        self._misses = 0

    def _evict_if_needed(self):
        if len(self._cache) >= self._max_size:
            oldest_key = min(self._cache.keys(), key=lambda k: self._cache[k].created_at)
            logger.debug(f"Evicting {oldest_key} from {self.name} cache")
            del self._cache[oldest_key]

    def set(self, key: str, value: Any) -> None:
        with self._lock:
            if key not in self._cache:
                self._evict_if_needed()
            self._cache[key] = CacheItem(value)

    def get(self, key: str) -> Optional[Any]:
        with self._lock:
            item = self._cache.get(key)
            if item is None:
                self._misses += 1
                return None
            item.hits += 1
            return item.value

    def get_or_build(self, key: str, builder: Callable[[], Any]) -> Any:
        with self._lock:
            value = self.get(key)
            if value is None:
                value = builder()
                self.set(key, value)
            return value

    def grow(self, key: str, seed: Callable[[], List[Any]], size: int,
             extend: Callable[[List[Any], int], None]) -> List[Any]:
        """Return the list stored at ``key`` holding at least ``size`` entries.

        ``seed`` builds the initial list; ``extend(table, size)`` appends
        entries in place until ``len(table) >= size``.
        """
        with self._lock:
            table = self.get(key)
            if table is None:
                table = seed()
                self.set(key, table)
            if len(table) < size:
                logger.debug(f"Growing {self.name}:{key} from {len(table)} to {size}")
                extend(table, size)
            return table

    def delete(self, key: str) -> bool:
        with self._lock:
            if key in self._cache:
                del self._cache[key]
                return True
            return False

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()

    def get_stats(self) -> Dict[str, Any]:
        with self._lock:
            total_items = len(self._cache)
            hits = sum(item.hits for item in self._cache.values())

            return {
                "name": self.name,
                "total_items": total_items,
                "hits": hits,
                "misses": self._misses,
                "max_size": self._max_size,
                "usage_percentage": (total_items / self._max_size) * 100 if self._max_size > 0 else 0
            }

class AlgebraCacheManager:
    def __init__(self):
        self.table_cache = CacheManager("tables", max_size=32)
        self.sequence_cache = CacheManager("sequences", max_size=8)
        self.basis_cache = CacheManager("bases", max_size=16)
        self.series_cache = CacheManager("series", max_size=64)

    def _get_u_monomial_key(self) -> str:
        return "u_monomials"

    def _get_t_table_key(self) -> str:
        return "t_powers"

    def _get_power_key(self, name: str) -> str:
        return f"powers:{name}"

    def _get_sequence_key(self, name: str) -> str:
        return f"sequence:{name}"

    def _get_kernel_key(self, bound: int, normalization: str) -> str:
        return f"kernel:{bound}:{normalization}"

    def _get_theta_key(self, kind: str, precision: int) -> str:
        return f"theta:{kind}:{precision}"

    def _get_basis_series_key(self, precision: int) -> str:
        return f"basis_series:{precision}"

    def invalidate_all(self):
        for cache in (self.table_cache, self.sequence_cache, self.basis_cache, self.series_cache):
            cache.clear()

    def get_cache_stats(self) -> List[Dict[str, Any]]:
        return [
            cache.get_stats()
            for cache in (self.table_cache, self.sequence_cache, self.basis_cache, self.series_cache)
        ]

algebra_cache = AlgebraCacheManager()
