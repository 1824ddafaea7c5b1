import pytest

from fockvampire.channels import DetectorModel
from fockvampire.config import CONFIG_KEYS, parse_config, serialize_config
from fockvampire.errors import ConfigError
from fockvampire.scenarios import ExperimentConfig


def test_empty_document_gives_defaults():
    assert parse_config("") == ExperimentConfig()
    assert parse_config("# only a comment\n\n   \n") == ExperimentConfig()


def test_values_are_read():
    config = parse_config(
        """
        # weaker source
        squeezing = 0.05
        tap_reflectivity = 0.1
        subtraction_efficiency = 0.9
        subtraction_dark_prob = 0
        subtraction_number_resolving = TRUE
        split_mu = 0.6
        split_lambda = 0.8j
        phases = 0.0, 0.5,1.0
        cutoff = 4
        seed = 17
        """
    )
    assert config.squeezing == 0.05
    assert config.tap_reflectivity == 0.1
    assert config.subtraction_detector == DetectorModel(0.9, 0.0, True)
    assert config.herald_detector == DetectorModel()
    assert config.split_mu == 0.6
    assert config.split_lambda == 0.8j
    assert config.phases == (0.0, 0.5, 1.0)
    assert config.cutoff == 4
    assert config.seed == 17


def test_serialized_config_reads_back_equal():
    config = ExperimentConfig(
        squeezing=0.07,
        herald_detector=DetectorModel(0.8, 0.001),
        subtraction_detector=DetectorModel(0.5, 0.0, True),
        split_mu=0.8,
        split_lambda=0.6j,
        phases=(0.0, 1.0, 2.0),
        samples_per_phase=123,
        seed=9,
    )
    text = serialize_config(config)
    assert [line.split(" = ")[0] for line in text.splitlines()] == list(CONFIG_KEYS)
    assert parse_config(text) == config
    assert parse_config(serialize_config(ExperimentConfig())) == ExperimentConfig()


def test_out_of_range_value_names_key_and_line():
    with pytest.raises(ConfigError) as info:
        parse_config("squeezing = 0.1\ntap_reflectivity = 1.5\n")
    assert info.value.field == "tap_reflectivity"
    assert info.value.line == 2


def test_detector_value_names_config_key():
    with pytest.raises(ConfigError) as info:
        parse_config("\n\nherald_dark_prob = 2\n")
    assert info.value.field == "herald_dark_prob"
    assert info.value.line == 3


@pytest.mark.parametrize(
    "text, field, line",
    [
        ("colour = blue\n", "colour", 1),
        ("seed = 1\nseed = 2\n", "seed", 2),
        ("cutoff = five\n", "cutoff", 1),
        ("subtraction_number_resolving = maybe\n", "subtraction_number_resolving", 1),
        ("# header\njust some words\n", None, 2),
        ("= 0.1\n", None, 1),
    ],
)
def test_malformed_documents(text, field, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.field == field
    assert info.value.line == line


def test_invalid_splitter_is_reported():
    with pytest.raises(ConfigError) as info:
        parse_config("split_mu = 0.5\nsplit_lambda = 0.5\n")
    assert info.value.field == "split_mu"
    assert info.value.line == 1
