import pytest
from fastapi.testclient import TestClient

from scorer_service.app import create_app
from scorer_service.scoring import HashStubBackend


@pytest.fixture(scope="session")
def client():
    return TestClient(create_app(HashStubBackend()))
