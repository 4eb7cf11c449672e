import pytest

from guide import ConfigError
from guide.config import DEFAULTS, resolve_config


def write(tmp_path, text):
    p = tmp_path / "guide.toml"
    p.write_text(text)
    return p


def test_defaults():
    cfg = resolve_config(env={})
    assert cfg.tracker.energy_target_j == 150.0
    assert cfg.tracker.ema_weight == 0.3
    assert cfg.meter.base_draw_w == 45.0
    assert cfg.selector.max_retries == 20
    assert cfg.simulation["seed"] == 0


def test_precedence_flags_env_file_defaults(tmp_path):
    p = write(tmp_path, "[tracker]\nenergy_target_j = 120\nema_weight = 0.5\n[simulation]\nseed = 3\n")
    env = {"GUIDE_TRACKER_ENERGY_TARGET_J": "110", "GUIDE_SIMULATION_SEED": "4"}
    cfg = resolve_config(p, env=env, overrides={"tracker": {"energy_target_j": 100.0, "ema_weight": None}})
    assert cfg.tracker.energy_target_j == 100.0  # flag
    assert cfg.simulation["seed"] == 4  # env beats file
    assert cfg.tracker.ema_weight == 0.5  # file; None override is skipped
    assert cfg.tracker.slot_duration_s == 2.0  # default


def test_env_bool_coercion():
    cfg = resolve_config(env={"GUIDE_TRACKER_EMA_PERSISTS_ACROSS_SLOTS": "yes"})
    assert cfg.tracker.ema_persists_across_slots is True


@pytest.mark.parametrize(
    "text",
    [
        "[nope]\nx = 1\n",
        "[tracker]\nbogus = 1\n",
        "[tracker]\nema_weight = 'high'\n",
        "[selector]\nmax_retries = 2.5\n",
        "[tracker]\nema_weight = 0\n",
        "not toml ===",
    ],
)
def test_bad_files_rejected(tmp_path, text):
    with pytest.raises(ConfigError):
        resolve_config(write(tmp_path, text), env={})


def test_bad_env_rejected():
    with pytest.raises(ConfigError):
        resolve_config(env={"GUIDE_SELECTOR_MAX_RETRIES": "many"})


def test_missing_file():
    with pytest.raises(ConfigError):
        resolve_config("/nonexistent/guide.toml", env={})


def test_echo_covers_every_key():
    echo = resolve_config(env={}).echo()
    for section, keys in DEFAULTS.items():
        assert set(keys) <= set(echo[section])
