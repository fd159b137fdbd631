import os
import tempfile

import numpy as np
import pytest

ACCEPTANCE = {}


def pytest_configure(config):
    # keep the frame filter cache inside the test session
    if "LTFT_CACHE_DIR" not in os.environ:
        os.environ["LTFT_CACHE_DIR"] = tempfile.mkdtemp(prefix="ltft-cache-")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def record_acceptance():
    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE[n] = line
        print(line)
        return ok

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
