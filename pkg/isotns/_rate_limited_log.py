"""
Thread-safe rate-limited logging.

Monte Carlo runs emit progress and warning lines from many chunks; this keeps
identical lines from flooding the log while still reporting each event class.
"""
import logging
import threading
from typing import Optional

from cachetools import TTLCache

logger = logging.getLogger(__name__)

_log_cache: Optional[TTLCache] = None
_log_cache_lock = threading.RLock()


def _cache(interval: int) -> TTLCache:
    global _log_cache
    with _log_cache_lock:
        if _log_cache is None or _log_cache.ttl != interval:
            _log_cache = TTLCache(maxsize=256, ttl=interval)
        return _log_cache


def reset_rate_limits() -> None:
    """Forget every previously logged key."""
    global _log_cache
    with _log_cache_lock:
        _log_cache = None


def rate_limited_log(
    message: str,
    level: str = "warning",
    interval: int = 60,
    logger_instance: Optional[logging.Logger] = None,
    key: Optional[str] = None,
) -> bool:
    """
    Log a message at most once per ``interval`` seconds, in a thread-safe manner.

    Args:
        message: Message to log
        level: Log level (debug, info, warning, error, critical)
        interval: Minimum interval between logs with the same key, in seconds
        logger_instance: Logger to use (defaults to module logger)
        key: Deduplication key; defaults to ``level:message``. Progress lines pass a
            fixed key so that changing counters still share one slot.

    Returns:
        True if the message was emitted, False if it was suppressed
    """
    log_instance = logger_instance or logger
    log_method = getattr(log_instance, level.lower(), log_instance.warning)
    cache_key = key or f"{level}:{message}"

    with _log_cache_lock:
        cache = _cache(interval)
        if cache_key in cache:
            return False
        log_method(message)
        cache[cache_key] = True
    return True
