"""
Tests for the rate-limited logging used by Monte Carlo progress reports.
"""
from unittest.mock import MagicMock, patch

from cachetools import TTLCache

from isotns import _rate_limited_log as rll
from isotns._rate_limited_log import rate_limited_log, reset_rate_limits


class TestRateLimitedLog:
    """Tests for rate_limited_log."""

    def test_duplicate_suppressed(self):
        mock_logger = MagicMock()
        assert rate_limited_log("Test message", logger_instance=mock_logger)
        assert not rate_limited_log("Test message", logger_instance=mock_logger)
        mock_logger.warning.assert_called_once_with("Test message")

    def test_level_is_part_of_key(self):
        mock_logger = MagicMock()
        rate_limited_log("Test message", level="warning", logger_instance=mock_logger)
        rate_limited_log("Test message", level="error", logger_instance=mock_logger)
        mock_logger.warning.assert_called_once_with("Test message")
        mock_logger.error.assert_called_once_with("Test message")

    def test_explicit_key_shares_slot(self):
        mock_logger = MagicMock()
        rate_limited_log("samples: 10/100 done", level="info", logger_instance=mock_logger, key="progress:x")
        rate_limited_log("samples: 20/100 done", level="info", logger_instance=mock_logger, key="progress:x")
        mock_logger.info.assert_called_once_with("samples: 10/100 done")

    def test_unknown_level_falls_back_to_warning(self):
        mock_logger = MagicMock(spec=["warning"])
        rate_limited_log("odd level", level="verbose", logger_instance=mock_logger)
        mock_logger.warning.assert_called_once_with("odd level")

    def test_reset(self):
        mock_logger = MagicMock()
        rate_limited_log("again", logger_instance=mock_logger)
        reset_rate_limits()
        rate_limited_log("again", logger_instance=mock_logger)
        assert mock_logger.warning.call_count == 2

    def test_expiry(self):
        mock_logger = MagicMock()
        clock = [0.0]
        cache = TTLCache(maxsize=256, ttl=60, timer=lambda: clock[0])
        with patch.object(rll, "_log_cache", cache):
            rate_limited_log("expiring", logger_instance=mock_logger)
            clock[0] = 30.0
            rate_limited_log("expiring", logger_instance=mock_logger)
            clock[0] = 61.0
            rate_limited_log("expiring", logger_instance=mock_logger)
        assert mock_logger.warning.call_count == 2

    def test_interval_change_replaces_cache(self):
        mock_logger = MagicMock()
        rate_limited_log("a", interval=60, logger_instance=mock_logger)
        rate_limited_log("a", interval=5, logger_instance=mock_logger)
        assert mock_logger.warning.call_count == 2
