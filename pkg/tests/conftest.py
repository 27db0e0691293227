"""Shared pytest configuration."""

import pytest
import structlog


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: property and sampling suites skipped by run_tests.sh --fast")


@pytest.fixture(autouse=True)
def _restore_structlog_config():
    # In-process CLI runs reconfigure structlog against pytest's captured
    # stderr, which is closed after the test; restore the global config.
    saved = structlog.get_config()
    yield
    structlog.configure(**saved)
