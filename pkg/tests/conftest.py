from __future__ import annotations

from pathlib import Path

import pytest

from leibniz_rw.builtins import boolean_context, fp64_context, numbers_context
from leibniz_rw.document import DocumentStore

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def store() -> DocumentStore:
    return DocumentStore()


@pytest.fixture(scope="session")
def heron_doc(store):
    return store.load(CORPUS / "heron.lzd")


@pytest.fixture(scope="session")
def predator_prey_doc(store):
    return store.load(CORPUS / "predator-prey.lzd")


@pytest.fixture(scope="session")
def functions_doc(store):
    return store.load(CORPUS / "functions.lzd")


@pytest.fixture(scope="session")
def euler_doc(store):
    return store.load(CORPUS / "euler.lzd")


@pytest.fixture(scope="session")
def booleans():
    return boolean_context()


@pytest.fixture(scope="session")
def numbers():
    return numbers_context()


@pytest.fixture(scope="session")
def fp64():
    return fp64_context()


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {name}: {status}", flush=True)
