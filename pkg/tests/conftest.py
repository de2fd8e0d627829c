import pytest

from sdkaudit.ontology import load_bundled_ontology
from sdkaudit.taint import load_bundled_catalog, load_catalog_document

from oracles import REF_CATALOG_YAML


@pytest.fixture(scope="session")
def ontology():
    return load_bundled_ontology()


@pytest.fixture(scope="session")
def catalog(ontology):
    return load_bundled_catalog(ontology)


@pytest.fixture(scope="session")
def ref_catalog(ontology):
    """The exact-name catalog mirrored by tests/oracles.py."""
    return load_catalog_document(REF_CATALOG_YAML, ontology)
