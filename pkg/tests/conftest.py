"""Shared fixtures for the test suite."""

import pytest

from app import create_app
from app.extensions import db
from app.utils.catalog import worked


@pytest.fixture
def app():
    app = create_app('testing')
    with app.app_context():
        db.create_all()
        yield app
        db.session.remove()
        db.drop_all()


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def x36_40():
    return worked('ci2-extreme').family


@pytest.fixture
def x16_18_20():
    return worked('ci3-extreme').family
