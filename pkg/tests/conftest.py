import pytest

import support


@pytest.fixture
def store(tmp_path):
    s = support.open_store(tmp_path / "store")
    yield s
    s.close()


@pytest.fixture
def api(store):
    """Admin-credentialed client over an in-process service."""
    client = support.service_client(store, token=support.ADMIN_TOKEN)
    yield client
    client.close()
