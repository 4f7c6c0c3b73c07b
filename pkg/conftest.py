import os

import pytest

from dimcodes.covercode import CODE_CACHE


@pytest.fixture(scope="session", autouse=True)
def code_cache_dir(tmp_path_factory):
    """Canonical codes are searched into a fresh directory once per session."""
    directory = tmp_path_factory.mktemp("codes")
    previous = os.environ.get("DIMCODES_CACHE_DIR")
    os.environ["DIMCODES_CACHE_DIR"] = str(directory)
    CODE_CACHE.clear()
    yield directory
    CODE_CACHE.clear()
    if previous is None:
        os.environ.pop("DIMCODES_CACHE_DIR", None)
    else:
        os.environ["DIMCODES_CACHE_DIR"] = previous
