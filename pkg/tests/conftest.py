"""
Pytest configuration and shared fixtures for rsp-cycles tests.
This file contains common fixtures and test configuration used across all test modules.
"""

import pytest
import tempfile
import shutil

from app import create_app, db
from app.dynamics.game_core import PayoffParams


# ============================================================================
# Application Fixtures
# ============================================================================

@pytest.fixture(scope='session')
def app_config():
    """Base test configuration."""
    return {
        'TESTING': True,
        'SQLALCHEMY_DATABASE_URI': 'sqlite:///:memory:',
        'SQLALCHEMY_ENGINE_OPTIONS': {},
        'SECRET_KEY': 'test-secret-key-do-not-use-in-production',
        'RATELIMIT_ENABLED': False,
        'REGION_RESOLUTION': 21,
        'API_MAX_RESOLUTION': 31,
        'BASIN_SAMPLES': 100,
        'BASIN_HORIZON': 50.0,
    }


@pytest.fixture(scope='function')
def app(app_config):
    """Create application for testing with function scope."""
    app = create_app(app_config)

    with app.app_context():
        db.create_all()

        yield app

        db.session.remove()
        db.drop_all()


@pytest.fixture(scope='function')
def client(app):
    """Create test client."""
    return app.test_client()


@pytest.fixture(scope='function')
def runner(app):
    """Create test CLI runner."""
    return app.test_cli_runner()


# ============================================================================
# Parameter Fixtures
# ============================================================================

@pytest.fixture
def zero_sum():
    """Tie payoffs of the zero-sum game."""
    return PayoffParams(0.0, 0.0)


@pytest.fixture
def c0_stable():
    """Tie payoffs where C0 attracts essentially all nearby states."""
    return PayoffParams(-0.3, -0.3)


@pytest.fixture
def c2_fragile():
    """Tie payoffs where C2 attracts a positive-measure but thin set."""
    return PayoffParams(0.9, 0.5)


# ============================================================================
# Filesystem Fixtures
# ============================================================================

@pytest.fixture
def temp_dir():
    """Temporary directory removed after the test."""
    path = tempfile.mkdtemp(prefix='rspcycles-')
    yield path
    shutil.rmtree(path, ignore_errors=True)
