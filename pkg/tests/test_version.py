"""
Tests for the version module of isotns.
"""
import importlib
import re
from importlib import metadata as importlib_metadata
from unittest.mock import mock_open, patch

import pytest

import isotns.version as vmod


@pytest.fixture(autouse=True)
def _restore_version():
    yield
    importlib.reload(vmod)


def test_version_format():
    """The version string follows semantic versioning"""
    assert re.match(r'^\d+\.\d+\.\d+$', vmod.__version__)


@patch('importlib.metadata.version')
def test_version_from_metadata(mock_metadata_version):
    """An installed distribution wins"""
    mock_metadata_version.return_value = "2.3.4"
    importlib.reload(vmod)
    assert vmod.__version__ == "2.3.4"


@patch('importlib.metadata.version')
@patch('pathlib.Path.open', new_callable=mock_open, read_data=b'[tool.poetry]\nversion = "1.2.3"\n')
def test_version_from_manifest(mock_open_file, mock_metadata_version):
    """A development checkout reads pyproject.toml"""
    mock_metadata_version.side_effect = importlib_metadata.PackageNotFoundError
    importlib.reload(vmod)
    assert vmod.__version__ == "1.2.3"


@patch('importlib.metadata.version')
@patch('pathlib.Path.open', new_callable=mock_open, read_data=b'[project]\nversion = "4.5.6"\n')
def test_version_from_project_table(mock_open_file, mock_metadata_version):
    """A PEP 621 manifest is read when there is no Poetry table"""
    mock_metadata_version.side_effect = importlib_metadata.PackageNotFoundError
    importlib.reload(vmod)
    assert vmod.__version__ == "4.5.6"


@patch('importlib.metadata.version')
@patch('pathlib.Path.open', new_callable=mock_open, read_data=b'[tool.other]\nname = "x"\n')
def test_version_manifest_without_key(mock_open_file, mock_metadata_version):
    mock_metadata_version.side_effect = importlib_metadata.PackageNotFoundError
    importlib.reload(vmod)
    assert vmod.__version__ == "0.1.0"


@patch('importlib.metadata.version')
@patch('pathlib.Path.open', side_effect=FileNotFoundError())
def test_version_manifest_missing(mock_open_file, mock_metadata_version):
    mock_metadata_version.side_effect = importlib_metadata.PackageNotFoundError
    importlib.reload(vmod)
    assert vmod.__version__ == "0.1.0"
