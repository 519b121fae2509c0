import threading

import numpy as np
import pytest

from mvsrefine.config import Settings, get_settings
from mvsrefine.tasks.view_tasks import run_per_view
from mvsrefine.utils.rng import lattice_uniforms, pixel_uniforms, stream_key


@pytest.fixture
def clean_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def test_settings_defaults(monkeypatch, clean_settings):
    for name in ("MVSREFINE_LOG_LEVEL", "MVSREFINE_LOG_FORMAT", "MVSREFINE_WORKERS"):
        monkeypatch.delenv(name, raising=False)
    settings = Settings(_env_file=None)
    assert (settings.log_level, settings.log_format, settings.workers) == ("WARNING", "json", 1)


def test_settings_read_prefixed_environment(monkeypatch, clean_settings):
    monkeypatch.setenv("MVSREFINE_WORKERS", "4")
    monkeypatch.setenv("MVSREFINE_LOG_FORMAT", "console")
    settings = get_settings()
    assert settings.workers == 4
    assert settings.log_format == "console"
    assert get_settings() is settings


def test_settings_reject_bad_values(monkeypatch, clean_settings):
    monkeypatch.setenv("MVSREFINE_WORKERS", "0")
    with pytest.raises(ValueError):
        Settings(_env_file=None)


def test_stream_keys_are_stable_and_distinct():
    assert stream_key(0, 2, 1) == stream_key(0, 2, 1)
    keys = {stream_key(seed, level, r) for seed in range(3) for level in range(3) for r in range(-1, 3)}
    assert len(keys) == 36


def test_pixel_uniforms():
    key = stream_key(7, 0, 0)
    a = pixel_uniforms(key, 16, 12, 3)
    assert a.shape == (16, 12, 3)
    assert np.all((a >= 0.0) & (a < 1.0))
    np.testing.assert_array_equal(a, pixel_uniforms(key, 16, 12, 3))
    # a pixel's sample does not depend on the grid size
    np.testing.assert_array_equal(a[:8, :6], pixel_uniforms(key, 8, 6, 3))
    assert not np.array_equal(a, pixel_uniforms(stream_key(8, 0, 0), 16, 12, 3))
    assert abs(a.mean() - 0.5) < 0.05


def test_lattice_uniforms_handle_negative_coordinates():
    ix, iy = np.array([-3, -3, 5]), np.array([-1, 2, -1])
    values = lattice_uniforms(11, ix, iy)
    assert np.all((values >= 0.0) & (values < 1.0))
    assert len(set(values.tolist())) == 3
    np.testing.assert_array_equal(values, lattice_uniforms(11, ix, iy))


@pytest.mark.parametrize("workers", [1, 2, 4])
def test_run_per_view_keeps_input_order(workers):
    names = []

    def task(item):
        names.append(threading.current_thread().name)
        return item * item

    assert run_per_view(task, list(range(10)), workers) == [i * i for i in range(10)]
    if workers == 1:
        assert set(names) == {threading.main_thread().name}


def test_run_per_view_falls_back_to_settings(monkeypatch, clean_settings):
    monkeypatch.setenv("MVSREFINE_WORKERS", "2")
    assert run_per_view(lambda x: x + 1, [1, 2, 3]) == [2, 3, 4]
