import numpy as np
import pytest

import spikedtensor as st
from spikedtensor.config import gram_matrices, parse_config_text, resolve_config
from spikedtensor.errors import ConfigError


def test_parse_key_value_lines():
    text = "d=3\nlambdas = 0.5, 0.2  # amplitudes\n\n# comment line\nseed=7\n"
    values = parse_config_text(text)
    assert values == {"d": "3", "lambdas": "0.5, 0.2", "seed": "7"}


def test_parse_reports_line_numbers():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("d=3\nnot a pair\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("mystery=1\n")


def test_serialize_round_trip_is_normalizing():
    text = "seed=5\nd=3\nlambdas=0.5,0.25\n"
    config = resolve_config("threshold", parse_config_text(text))
    normalized = config.serialize()
    again = resolve_config("threshold", parse_config_text(normalized))
    assert again.serialize() == normalized
    assert again == config


def test_flags_override_file_values():
    file_values = parse_config_text("seed=5\nlambdas=0.5\n")
    config = resolve_config("moment", file_values, {"seed": "9"})
    assert config.seed == 9
    assert config.lambdas == (0.5,)


def test_resolve_validates_fields():
    with pytest.raises(ConfigError, match="'d'"):
        resolve_config("threshold", {"d": "1"})
    with pytest.raises(ConfigError, match="'lambdas'"):
        resolve_config("threshold", {"lambdas": "0.5,-0.1"})
    with pytest.raises(ConfigError, match="'r'"):
        resolve_config("threshold", {"lambdas": "0.5,0.2", "r": "3"})
    with pytest.raises(ConfigError, match="'format'"):
        resolve_config("threshold", {"format": "xml"})
    with pytest.raises(ConfigError, match="kind"):
        resolve_config("nonsense")


def test_gram_presets():
    identity = gram_matrices("identity", 3, 2)
    assert all(np.array_equal(g, np.eye(3)) for g in identity.grams)

    ones = gram_matrices("all-ones", 2, 3)
    assert all(np.array_equal(g, np.ones((2, 2))) for g in ones.grams)

    two = gram_matrices("two-eigenvalue:1.8,0.2", 2, 3)
    for g in two.grams:
        assert np.allclose(np.linalg.eigvalsh(g), [0.2, 1.8])
        assert np.allclose(np.diagonal(g), 1.0)


def test_gram_literal_json():
    single = gram_matrices("[[1.0, 0.5], [0.5, 1.0]]", 2, 3)
    assert len(single.grams) == 3
    per_mode = gram_matrices("[[[1.0,0.0],[0.0,1.0]],[[1.0,0.5],[0.5,1.0]]]", 2, 2)
    assert not np.array_equal(per_mode.grams[0], per_mode.grams[1])


def test_gram_errors():
    with pytest.raises(ConfigError, match="gram"):
        gram_matrices("mystery", 2, 3)
    with pytest.raises(ConfigError, match="sum to 2"):
        gram_matrices("two-eigenvalue:1.5,0.2", 2, 3)
    with pytest.raises(ConfigError, match="r=2"):
        gram_matrices("two-eigenvalue:1.8,0.2", 3, 3)
    with pytest.raises(ConfigError, match="JSON"):
        gram_matrices("[[1.0, 0.5]", 2, 3)
    with pytest.raises(ConfigError, match="2x2"):
        gram_matrices("[[1.0]]", 2, 3)
    with pytest.raises(ConfigError):
        gram_matrices("[[1.0, 1.5], [1.5, 1.0]]", 2, 3)  # not PSD


def test_two_eigenvalue_preset_matches_eta_max():
    grams = gram_matrices("two-eigenvalue:1.8,0.2", 2, 3)
    emax = st.eta_max([1.0, 1.0], grams)
    assert emax == pytest.approx(2 + 2 * 0.8**3, rel=1e-12)
