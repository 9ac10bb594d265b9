import math
import os
import sys

import pytest
from hypothesis import HealthCheck, settings as hypothesis_settings

# 添加项目根目录到系统路径
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.core.config import settings  # noqa: E402
from app.physics.mirror_em import radiative_correction  # noqa: E402
from app.schemas.params import AtomParams, MirrorConfig  # noqa: E402

hypothesis_settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
hypothesis_settings.register_profile("ci", max_examples=300, deadline=None)
hypothesis_settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def restore_settings():
    """命令行测试会改写全局 settings，测试结束后还原"""
    snapshot = settings.model_dump()
    settings.SHOW_PROGRESS = False
    yield
    for key, value in snapshot.items():
        setattr(settings, key, value)


@pytest.fixture
def fig4_atom():
    return AtomParams(omega1=10.0, omega2=5.0, delta1=2.0, delta2=0.0, gamma1=15.1, gamma2=5.4)


@pytest.fixture
def reference_mirror():
    return MirrorConfig.from_k31r(10 * math.pi)


@pytest.fixture
def fig4_correction(fig4_atom, reference_mirror):
    return radiative_correction(reference_mirror, fig4_atom)


@pytest.fixture
def client():
    from fastapi.testclient import TestClient

    from app.main import app

    with TestClient(app) as test_client:
        yield test_client
