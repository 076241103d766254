"""Test the debugging commands in tests/debug.py."""

from typer.testing import CliRunner

import tests.debug


runner = CliRunner()


def test_parse_bundled():
    result = runner.invoke(tests.debug.app, ["parse", "bundled:h2_sto3g"])
    assert result.exit_code == 0
    assert "header" in result.stdout


def test_encode():
    result = runner.invoke(tests.debug.app, ["encode"])
    assert result.exit_code == 0
    assert len(result.stdout.splitlines()[0].split()) == 4


def test_circuit():
    args = ["circuit", "XXY", "--replicas", "2"]
    result = runner.invoke(tests.debug.app, args)
    assert result.exit_code == 0
    assert result.stdout.splitlines()[-1] == "# cnots: 8"
