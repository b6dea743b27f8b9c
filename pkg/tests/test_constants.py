from laplace2ds.__about__ import __version__
from laplace2ds.constants import NAME, ROOT_DIR, VERSION


def test_version():
    assert "dev" in __version__
    assert VERSION == __version__


def test_templates_shipped():
    assert NAME == "laplace2ds"
    assert ROOT_DIR.joinpath("templates", "check_report.txt").is_file()
