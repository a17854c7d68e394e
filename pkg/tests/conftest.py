import os

import pytest


def pytest_collection_modifyitems(config, items):
    if os.environ.get("ORBITOOL_OPTIN") == "1":
        return
    skip = pytest.mark.skip(reason="opt-in: set ORBITOOL_OPTIN=1")
    for item in items:
        if "optin" in item.keywords:
            item.add_marker(skip)
