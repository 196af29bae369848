"""Shared pytest fixtures.

Builders write artifacts under LATININF_HOME when no --out is given, so any
test touching the store or the CLI redirects it into tmp_path first; the real
per-OS app dir is never touched.
"""

from __future__ import annotations

from pathlib import Path

import pytest


@pytest.fixture()
def tmp_home(tmp_path, monkeypatch):
    """LATININF_HOME pointed at an empty dir under tmp_path."""
    home: Path = tmp_path / "LatinInf"
    monkeypatch.setenv("LATININF_HOME", str(home))
    monkeypatch.delenv("LATININF_JOBS", raising=False)
    yield home


@pytest.fixture()
def runner(tmp_home):
    from click.testing import CliRunner
    return CliRunner()


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long greedy builds (deselect with -m 'not slow')")
