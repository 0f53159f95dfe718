import os


class Config:
    """Base configuration class"""

    # Flask settings
    SECRET_KEY = os.getenv('SECRET_KEY', 'dev-secret-key-change-in-production')
    FLASK_ENV = os.getenv('FLASK_ENV', 'production')
    FLASK_DEBUG = os.getenv('FLASK_DEBUG', 'false').lower() == 'true'
    # Checked for production web serving only; the rspcycles entry point clears it
    REQUIRE_SECRET_KEY = os.getenv('REQUIRE_SECRET_KEY', 'true').lower() == 'true'

    # Database settings (run records only; SQLite is enough)
    SQLALCHEMY_DATABASE_URI = os.getenv('DATABASE_URL', 'sqlite:///rspcycles.db')
    SQLALCHEMY_TRACK_MODIFICATIONS = False
    SQLALCHEMY_ENGINE_OPTIONS = {
        'pool_pre_ping': True,
    }

    # Rate limiting
    RATELIMIT_ENABLED = os.getenv('RATELIMIT_ENABLED', 'true').lower() == 'true'
    RATELIMIT_DEFAULT = os.getenv('RATELIMIT_DEFAULT', '')  # e.g., "200 per day;50 per hour"
    RATELIMIT_STORAGE_URI = os.getenv('RATELIMIT_STORAGE_URI', 'memory://')
    REGIONS_RATE_LIMIT = os.getenv('REGIONS_RATE_LIMIT', '10 per minute')

    # Integration
    INTEGRATOR_DT = float(os.getenv('INTEGRATOR_DT', 1e-3))
    NEAR_THRESHOLD = float(os.getenv('NEAR_THRESHOLD', 0.1))

    # Stability analysis
    BOUNDARY_BAND = float(os.getenv('BOUNDARY_BAND', 1e-8))
    REGION_RESOLUTION = int(os.getenv('REGION_RESOLUTION', 201))
    # Region sweeps requested over HTTP are capped; the CLI is not
    API_MAX_RESOLUTION = int(os.getenv('API_MAX_RESOLUTION', 101))
    SWEEP_WORKERS = int(os.getenv('SWEEP_WORKERS', 1))

    # Monte Carlo basin estimates
    BASIN_SEED = int(os.getenv('BASIN_SEED', 42))
    BASIN_DT = float(os.getenv('BASIN_DT', 1e-2))
    BASIN_HORIZON = float(os.getenv('BASIN_HORIZON', 500))
    BASIN_DELTA = float(os.getenv('BASIN_DELTA', 0.05))
    BASIN_SAMPLES = int(os.getenv('BASIN_SAMPLES', 500))

    # Versioning
    APP_VERSION = os.getenv('APP_VERSION', os.getenv('GITHUB_TAG', None))
    if not APP_VERSION:
        github_run_number = os.getenv('GITHUB_RUN_NUMBER')
        APP_VERSION = f"dev-{github_run_number}" if github_run_number else "dev-0"


class DevelopmentConfig(Config):
    """Development configuration"""
    FLASK_DEBUG = True
    RATELIMIT_ENABLED = os.getenv('RATELIMIT_ENABLED', 'false').lower() == 'true'


class TestingConfig(Config):
    """Testing configuration"""
    TESTING = True
    SQLALCHEMY_DATABASE_URI = os.getenv('DATABASE_URL', 'sqlite:///:memory:')
    SQLALCHEMY_ENGINE_OPTIONS = {}
    SECRET_KEY = 'test-secret-key'
    RATELIMIT_ENABLED = False


class ProductionConfig(Config):
    """Production configuration"""
    FLASK_DEBUG = False


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
}
