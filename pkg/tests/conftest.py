import json
from importlib import resources

import pytest

from moranweights import cli


@pytest.fixture
def run_cli(capsys):
    """Invoke the CLI in process and capture (exit_code, stdout, stderr)."""

    def invoke(*argv):
        try:
            code = cli.main(list(argv))
        except SystemExit as exc:  # argparse paths exit instead of returning
            code = exc.code if exc.code is not None else 0
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


@pytest.fixture(scope="session")
def load_schema():
    def load(name):
        path = resources.files("moranweights").joinpath(f"schemas/{name}.schema.json")
        with path.open() as handle:
            return json.load(handle)

    return load
