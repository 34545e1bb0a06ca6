"""Shared fixtures: paths and definition-file loading."""

from __future__ import annotations

import os

import pytest

from pdes.deffile import Definition, load_definition

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "fixtures")
GOLDEN = os.path.join(HERE, "golden")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def load(name: str) -> Definition:
    return load_definition(fixture_path(name))


@pytest.fixture
def defn():
    return load
