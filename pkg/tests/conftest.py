import pytest
from hypothesis import HealthCheck, settings

from lamref.signature import CONSTANT, EXAMPLE1

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(params=[EXAMPLE1, CONSTANT], ids=["example1", "constant"])
def sig(request):
    return request.param
