"""Shared fixtures"""
import numpy as np
import pytest

from app.config import get_settings
from app.models import GmmsKind, GmmsSpec, ToleranceProfile
from app.tools.fock import FockCutoff
from app.tools.states import auto_cutoff, cvmms_state, thermal_state


@pytest.fixture
def tolerance() -> ToleranceProfile:
    """Default tolerance profile"""
    return ToleranceProfile()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so random checks are reproducible"""
    return np.random.default_rng(1234)


@pytest.fixture
def small_cutoff() -> FockCutoff:
    return FockCutoff(8)


@pytest.fixture
def vacuum(tolerance):
    """Vacuum as the nbar = 0 thermal state"""
    return thermal_state(0.0, FockCutoff(0), tolerance)


@pytest.fixture
def thermal_one(tolerance):
    """Thermal state with nbar = 1 at the automatic cutoff"""
    spec = GmmsSpec(kind=GmmsKind.THERMAL, nbar=1.0)
    return thermal_state(1.0, auto_cutoff(spec, tolerance), tolerance)


@pytest.fixture
def cvmms_one(tolerance):
    """Disk-bounded coherent mixture with b = 1 at the automatic cutoff"""
    spec = GmmsSpec(kind=GmmsKind.CVMMS, b=1.0)
    return cvmms_state(1.0, auto_cutoff(spec, tolerance), tolerance)


@pytest.fixture(autouse=True)
def clear_settings_cache():
    """Settings are cached; environment overrides in one test must not leak"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
