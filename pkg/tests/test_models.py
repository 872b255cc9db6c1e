"""
Tests for experiment configuration validation and result models.
"""
import pytest

from isotns.exceptions import ConfigurationError
from isotns.models import CSV_COLUMNS, DecayFit, ExperimentConfig, VarianceRecord


def _violations(**data):
    with pytest.raises(ConfigurationError) as excinfo:
        ExperimentConfig.from_mapping(data)
    return excinfo.value.violations


class TestExperimentConfig:
    """Tests for ExperimentConfig defaults and rule checks."""

    def test_mps_defaults(self):
        config = ExperimentConfig.from_mapping({"family": "mps", "size": 10})
        assert config.spec.branching == 1
        assert config.spec.d == 2
        assert config.kind == "site"
        assert config.width == 1
        assert config.samples == 64000
        assert config.sampled_positions() == list(range(1, 11))

    def test_hierarchical_defaults(self):
        config = ExperimentConfig.from_mapping({"family": "mera", "chi": 3, "size": 6})
        assert config.resolved_branching == 2
        assert config.spec.d == 3
        assert config.spec.num_sites == 64
        assert config.kind == "disentangler"
        assert config.width == 3
        assert config.fit_window() == (2, 4)

    def test_explicit_fit_window(self):
        config = ExperimentConfig.from_mapping({"family": "ttns", "size": 6, "fit_min": 1, "fit_max": 3})
        assert config.fit_window() == (1, 3)

    def test_unknown_key(self):
        assert "unknown key 'colour'" in _violations(family="mps", size=4, colour="red")

    def test_every_violation_is_listed(self):
        violations = _violations(family="mera", size=4, n_samples=1, chunk_size=0,
                                 positions=[0, 9], interaction_width=5)
        joined = "\n".join(violations)
        assert "n_samples must be >= 2" in joined
        assert "chunk_size must be >= 1" in joined
        assert "layer 0 outside 1..4" in joined
        assert "layer 9 outside 1..4" in joined
        assert "interaction_width must be in 1..3" in joined

    def test_structural_violation(self):
        assert any("hierarchical families use d = chi" in v for v in _violations(family="ttns", chi=2, d=3, size=3))

    def test_trotter_needs_power_of_two(self):
        assert any("chi = 2^q" in v for v in _violations(family="mera", chi=3, size=3, trotter_steps=1))

    def test_tensor_kind_must_belong_to_family(self):
        assert any("tensor_kind 'disentangler'" in v
                   for v in _violations(family="ttns", size=3, tensor_kind="disentangler"))

    def test_empty_fit_window(self):
        assert any("is empty" in v for v in _violations(family="ttns", size=6, fit_min=4, fit_max=2))

    def test_mps_site_positions(self):
        assert any("site 7 outside 1..6" in v for v in _violations(family="mps", size=6, positions=[7]))

    def test_frozen(self):
        config = ExperimentConfig.from_mapping({"family": "mps", "size": 4})
        with pytest.raises(ValueError):
            config.chi = 3

    def test_replaced_revalidates(self):
        config = ExperimentConfig.from_mapping({"family": "mps", "size": 4})
        assert config.replaced(chi=3).chi == 3
        with pytest.raises(ConfigurationError):
            config.replaced(size=0)

    def test_config_hash(self):
        base = ExperimentConfig.from_mapping({"family": "mps", "size": 4, "seed": 1})
        assert base.config_hash() == ExperimentConfig.from_mapping({"family": "mps", "size": 4, "seed": 1}).config_hash()
        assert base.config_hash() == base.replaced(output="out.csv", workers=4).config_hash()
        assert base.config_hash() != base.replaced(seed=2).config_hash()
        assert len(base.config_hash()) == 64


class TestResultModels:
    """Tests for VarianceRecord and DecayFit."""

    def test_csv_row_order(self):
        record = VarianceRecord(family="mps", chi=2, d=2, size=8, tau_or_site=3, n_samples=10,
                                mean_var=0.1, stderr=0.01, seed=5, wall_time=1.5)
        assert tuple(record.csv_row()) == CSV_COLUMNS
        assert "wall_time" not in record.csv_row()

    def test_decay_fit_contains(self):
        fit = DecayFit(decay_factor=0.5, ci_low=0.45, ci_high=0.55, window=(2, 4),
                       r_squared=0.99, slope=-0.69, intercept=0.0, n_points=3)
        assert fit.contains(0.5184)
        assert not fit.contains(0.6)
