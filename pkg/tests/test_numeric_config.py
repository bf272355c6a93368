import os
from unittest.mock import patch

import orjson
import pytest

from fqavc_minimax.numeric_config import ENV_VAR, NumericConfig, get_numeric_config, load_numeric_config


def test_defaults_when_env_empty():
    with patch.dict(os.environ, {ENV_VAR: ""}):
        get_numeric_config.cache_clear()
        config = get_numeric_config()
    assert config == NumericConfig()
    assert config.solver_tol == 1e-4
    assert config.max_total_dim == 256
    assert config.entanglement_dim_cap == 0


def test_env_override_file(tmp_path, caplog):
    config_file = tmp_path / "numeric.json"
    config_file.write_bytes(orjson.dumps({"solver_tol": 1e-6, "max_rounds": 5}))
    with patch.dict(os.environ, {ENV_VAR: str(config_file)}):
        get_numeric_config.cache_clear()
        with caplog.at_level("INFO"):
            config = get_numeric_config()
    assert config.solver_tol == 1e-6
    assert config.max_rounds == 5
    assert config.psd_atol == NumericConfig().psd_atol
    assert "Loaded numeric config overrides" in caplog.text


def test_integer_accepted_for_float_field(tmp_path):
    config_file = tmp_path / "numeric.json"
    config_file.write_bytes(orjson.dumps({"mirror_step": 2}))
    config = load_numeric_config(config_file)
    assert config.mirror_step == 2.0
    assert isinstance(config.mirror_step, float)


def test_unknown_field_rejected(tmp_path):
    config_file = tmp_path / "numeric.json"
    config_file.write_bytes(orjson.dumps({"not_a_field": 1}))
    with pytest.raises(ValueError, match="Unknown numeric config field"):
        load_numeric_config(config_file)


def test_float_for_integer_field_rejected(tmp_path):
    config_file = tmp_path / "numeric.json"
    config_file.write_bytes(orjson.dumps({"max_rounds": 2.5}))
    with pytest.raises(ValueError, match="must be an integer"):
        load_numeric_config(config_file)


def test_non_numeric_value_rejected(tmp_path):
    config_file = tmp_path / "numeric.json"
    config_file.write_bytes(orjson.dumps({"solver_tol": "small"}))
    with pytest.raises(ValueError, match="must be numeric"):
        load_numeric_config(config_file)


def test_non_object_payload_rejected(tmp_path):
    config_file = tmp_path / "numeric.json"
    config_file.write_bytes(b"[1, 2]")
    with pytest.raises(ValueError, match="JSON object"):
        load_numeric_config(config_file)


def test_invalid_json(tmp_path):
    config_file = tmp_path / "numeric.json"
    config_file.write_text("{broken")
    with pytest.raises(ValueError, match="not valid JSON"):
        load_numeric_config(config_file)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_numeric_config(tmp_path / "missing.json")
