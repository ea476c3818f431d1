import numpy as np
import pytest

from defectsift.imaging import GrayImage


def make_image(pixels, depth=8) -> GrayImage:
    return GrayImage(np.asarray(pixels, dtype=np.int64), depth)


def mask_image(mask, on=0, off=128, depth=8) -> GrayImage:
    """Image whose lost pixels are exactly ``mask``."""
    m = np.asarray(mask, dtype=bool)
    return GrayImage(np.where(m, on, off).astype(np.int64), depth)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = getattr(terminalreporter.config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
