import pytest

from qconf.codebook import PRESETS

PRESET_NAMES = sorted(PRESETS)


@pytest.fixture(params=PRESET_NAMES)
def preset_name(request):
    return request.param
