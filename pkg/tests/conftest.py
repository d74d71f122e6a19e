import pytest

import vmcd_fixture


@pytest.fixture(scope="session")
def vmcd(tmp_path_factory):
    """Full-size deterministic corpus fixture (705 videos, 2115 captions)."""
    return vmcd_fixture.build(tmp_path_factory.mktemp("vmcd"))
