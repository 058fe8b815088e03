import json

import pytest

from predgroups.config import AppConfig, load_config
from predgroups.errors import DataError


def test_defaults():
    config = load_config()
    assert config.vectorizer == "tfidf"
    assert config.provider_rate_limit == 1.0
    assert config.workers == 1


def test_file_then_env_then_overrides(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"server_port": 9000, "cache_dir": "from-file"}))
    monkeypatch.setenv("PREDGROUPS_SERVER_PORT", "9100")
    monkeypatch.setenv("PREDGROUPS_MODEL_DIR", "from-env")
    config = load_config(path, overrides={"server_port": 9200})
    assert config.server_port == 9200  # flag beats env beats file
    assert config.model_dir == "from-env"
    assert config.cache_dir == "from-file"


def test_env_coercion(monkeypatch):
    monkeypatch.setenv("PREDGROUPS_PROVIDER_RATE_LIMIT", "2.5")
    assert load_config().provider_rate_limit == 2.5


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"no_such_key": 1}))
    with pytest.raises(DataError):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(DataError):
        load_config(tmp_path / "nope.json")


def test_validation():
    with pytest.raises(DataError):
        AppConfig(vectorizer="bogus").validate()
    with pytest.raises(DataError):
        AppConfig(workers=0).validate()
    with pytest.raises(DataError):
        AppConfig(dataset="/no/such/file.json").validate()
