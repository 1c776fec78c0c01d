"""
Configuration module for fanosearch.

This module handles all application configuration including:
- Database settings (SQLite by default, any SQLAlchemy URL via DATABASE_URL)
- Census defaults (seed, prime field, plurigenus depth, budgets, workers)

Environment variables are loaded from .env file.
"""

import os
import sys
from dotenv import load_dotenv

# Load environment variables from .env file
basedir = os.path.abspath(os.path.dirname(__file__))
load_dotenv(os.path.join(basedir, '..', '.env'))


def _env_int(name: str, default: int) -> int:
    return int(os.environ.get(name, default))


def _env_float(name: str, default: float) -> float:
    return float(os.environ.get(name, default))


def _env_bool(name: str, default: bool) -> bool:
    return os.environ.get(name, str(default)).lower() in ('true', '1', 't')


def get_database_url():
    """
    Determine the database URL based on environment settings.

    Priority:
    1. If DATABASE_URL is set, use that
    2. Default to local SQLite under instance/

    Returns:
        str: Database connection URI
    """
    database_url = os.environ.get('DATABASE_URL')

    if database_url:
        if database_url.startswith('postgres://'):
            database_url = database_url.replace('postgres://', 'postgresql://', 1)
        return database_url

    db_path = os.path.abspath(os.path.join(basedir, '..', 'instance', 'census.db'))
    os.makedirs(os.path.dirname(db_path), exist_ok=True)
    return f'sqlite:///{db_path}'


class Config:
    """Base configuration shared across all environments."""

    SECRET_KEY = os.environ.get('SECRET_KEY') or 'dev-secret-key'

    # Database configuration
    SQLALCHEMY_DATABASE_URI = get_database_url()
    SQLALCHEMY_TRACK_MODIFICATIONS = False
    SQLALCHEMY_ENGINE_OPTIONS = {
        'pool_pre_ping': True,
    }

    # Census defaults
    CENSUS_INDEX = _env_int('CENSUS_INDEX', 1)
    CENSUS_SEED = _env_int('CENSUS_SEED', 20240601)
    CENSUS_PRIME = _env_int('CENSUS_PRIME', 32003)  # 0 selects the rationals
    CENSUS_PLURIGENUS_DEPTH = _env_int('CENSUS_PLURIGENUS_DEPTH', 4)
    CENSUS_FILTER = os.environ.get('CENSUS_FILTER', 'k0')
    CENSUS_QS_MODE = os.environ.get('CENSUS_QS_MODE', 'off')
    CENSUS_BUDGET_SPAIRS = _env_int('CENSUS_BUDGET_SPAIRS', 10 ** 6)
    CENSUS_BUDGET_SECONDS = _env_float('CENSUS_BUDGET_SECONDS', 300.0)
    CENSUS_WORKERS = _env_int('CENSUS_WORKERS', 1)
    CENSUS_EXTRA_TERMS = _env_int('CENSUS_EXTRA_TERMS', 12)
    CENSUS_RETRIES = _env_int('CENSUS_RETRIES', 3)
    CENSUS_OUTPUT_DIR = os.environ.get(
        'CENSUS_OUTPUT_DIR', os.path.abspath(os.path.join(basedir, '..', 'instance', 'census')))
    CENSUS_RESUME = _env_bool('CENSUS_RESUME', False)


class DevelopmentConfig(Config):
    """Development configuration - local runs."""
    DEBUG = True
    SQLALCHEMY_ECHO = False  # Set to True to see SQL queries in logs


class ProductionConfig(Config):
    """Production configuration - long census runs on a shared database."""
    DEBUG = False

    if not os.environ.get('DATABASE_URL'):
        print("WARNING: No DATABASE_URL set. Census runs are stored in local SQLite.", file=sys.stderr)


class TestingConfig(Config):
    """Testing configuration - for automated tests."""
    TESTING = True
    SQLALCHEMY_DATABASE_URI = 'sqlite:///:memory:'  # In-memory database
    CENSUS_BUDGET_SECONDS = 120.0


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def print_config():
    """Print current configuration (for debugging)."""
    env = os.environ.get('FLASK_CONFIG', 'development')
    cfg = config.get(env, config['default'])

    print(f"\n{'='*60}")
    print(f"Configuration: {env.upper()}")
    print(f"{'='*60}")
    print(f"Database: {'SQLite' if 'sqlite' in cfg.SQLALCHEMY_DATABASE_URI else 'PostgreSQL'}")
    print(f"Field: {'QQ' if cfg.CENSUS_PRIME == 0 else f'GF({cfg.CENSUS_PRIME})'}")
    print(f"Seed: {cfg.CENSUS_SEED}")
    print(f"Workers: {cfg.CENSUS_WORKERS}")
    print(f"Output: {cfg.CENSUS_OUTPUT_DIR}")
    print(f"{'='*60}\n")


if __name__ == '__main__':
    print_config()
