import json

import numpy as np
import pytest

import faclik as fl
from faclik.generate import preset_config

from conftest import demo_model, small_model


class TestValidation:
    def test_demo_is_valid(self, demo_spec):
        assert fl.validate_model(demo_spec) == []

    def test_scaled_column_reported(self, demo_spec):
        bad = np.array(demo_spec.likelihoods[1].values)
        bad[:, 0, 0] *= 2
        spec = fl.ModelSpec(
            factors=demo_spec.factors,
            modalities=demo_spec.modalities,
            likelihoods=(demo_spec.likelihoods[0], fl.LikelihoodTensor(1, bad)),
        )
        codes = [(v.code, v.where) for v in fl.validate_model(spec)]
        assert ("non-normalized-column", "modality 1") in codes

    def test_dep_out_of_range(self, demo_spec):
        spec = fl.ModelSpec(
            factors=demo_spec.factors,
            modalities=(demo_spec.modalities[0], fl.ModalitySpec(1, 2, (0, 7))),
            likelihoods=demo_spec.likelihoods,
        )
        codes = [v.code for v in fl.validate_model(spec)]
        assert "dep-out-of-range" in codes

    def test_shape_mismatch(self, demo_spec):
        spec = fl.ModelSpec(
            factors=demo_spec.factors,
            modalities=demo_spec.modalities,
            likelihoods=(demo_spec.likelihoods[0], fl.LikelihoodTensor(1, np.full((2, 2, 2), 0.5))),
        )
        codes = [v.code for v in fl.validate_model(spec)]
        assert "shape-mismatch" in codes

    def test_duplicate_dep_and_empty_deps(self):
        spec = demo_model()
        bad = fl.ModelSpec(
            factors=spec.factors,
            modalities=(fl.ModalitySpec(0, 2, (0, 0)), fl.ModalitySpec(1, 2, ())),
            likelihoods=spec.likelihoods,
        )
        codes = {v.code for v in fl.validate_model(bad)}
        assert "duplicate-dep" in codes and "empty-deps" in codes


class TestAccounting:
    def test_demo_param_count(self, demo_spec):
        assert fl.original_param_count(demo_spec) == 2 * 2 + 2 * 2 * 3 == 16

    def test_single_modality_count(self):
        spec = fl.ModelSpec(
            factors=(fl.FactorSpec(0, 4),),
            modalities=(fl.ModalitySpec(0, 5, (0,)),),
            likelihoods=(fl.LikelihoodTensor(0, np.full((5, 4), 0.2)),),
        )
        assert fl.original_param_count(spec) == 20

    @pytest.mark.parametrize("seed", range(8))
    def test_count_matches_stored_sizes(self, seed):
        spec = small_model(seed)
        assert fl.original_param_count(spec) == sum(l.values.size for l in spec.likelihoods)

    def test_sparsity_threshold_zero(self):
        values = np.full((4, 4), 0.25)
        values[0, :2] = 0.0
        values[1, :2] = 0.5
        spec = fl.ModelSpec(
            factors=(fl.FactorSpec(0, 4),),
            modalities=(fl.ModalitySpec(0, 4, (0,)),),
            likelihoods=(fl.LikelihoodTensor(0, values),),
        )
        stats = fl.sparsity_stats(spec, 0.0)
        assert stats.total == 16 and stats.nonzero == 14
        assert stats.sparsity_percent == pytest.approx(100 * 2 / 16)

    def test_uniform_tables_have_no_zeros(self, uniform_demo_spec):
        assert fl.sparsity_stats(uniform_demo_spec).sparsity_percent == 0.0

    def test_magnitude_threshold(self):
        values = np.array([[1e-6, 0.5], [1.0 - 1e-6, 0.5]])
        spec = fl.ModelSpec(
            factors=(fl.FactorSpec(0, 2),),
            modalities=(fl.ModalitySpec(0, 2, (0,)),),
            likelihoods=(fl.LikelihoodTensor(0, values),),
        )
        assert fl.sparsity_stats(spec, 0.0).nonzero == 4
        assert fl.sparsity_stats(spec, 1e-5).nonzero == 3


class TestGenerator:
    def test_determinism(self):
        cfg = fl.GeneratorConfig(
            seed=9, num_factors=3, factor_cardinality_range=(2, 5),
            num_modalities=4, outcome_cardinality_range=(2, 5),
            deps_per_modality_range=(1, 3), functional_sparsity_target=0.4,
        )
        a, b = fl.generate_model(cfg), fl.generate_model(cfg)
        assert a.factors == b.factors and a.modalities == b.modalities
        for la, lb in zip(a.likelihoods, b.likelihoods):
            assert la.values.tobytes() == lb.values.tobytes()

    @pytest.mark.parametrize("seed", range(6))
    def test_generated_models_are_valid(self, seed):
        assert fl.validate_model(small_model(seed)) == []

    def test_zero_rho_leaves_no_zeros(self):
        spec = small_model(3, rho=0.0)
        assert fl.sparsity_stats(spec).sparsity_percent <= 1.0

    @pytest.mark.parametrize("rho", [0.2, 0.45, 0.6])
    def test_rho_within_three_points(self, rho):
        cfg = fl.GeneratorConfig(
            seed=11, num_factors=3, factor_cardinality_range=(2, 6),
            num_modalities=6, outcome_cardinality_range=(3, 8),
            deps_per_modality_range=(1, 3), functional_sparsity_target=rho,
        )
        spec = fl.generate_model(cfg)
        assert fl.validate_model(spec) == []
        achieved = fl.sparsity_stats(spec).sparsity_percent / 100
        assert abs(achieved - rho) <= 0.03

    def test_every_column_keeps_mass(self):
        cfg = fl.GeneratorConfig(
            seed=5, num_factors=2, factor_cardinality_range=(2, 4),
            num_modalities=5, outcome_cardinality_range=(2, 4),
            deps_per_modality_range=(1, 2), functional_sparsity_target=0.45,
        )
        spec = fl.generate_model(cfg)
        for lik in spec.likelihoods:
            cols = lik.values.reshape(lik.values.shape[0], -1)
            assert np.all(cols.max(axis=0) > 0)
            np.testing.assert_allclose(cols.sum(axis=0), 1.0, atol=1e-12)

    def test_infeasible_sparsity_raises(self):
        cfg = fl.GeneratorConfig(
            seed=1, num_factors=2, factor_cardinality_range=(2, 3),
            num_modalities=3, outcome_cardinality_range=(2, 2),
            deps_per_modality_range=(1, 2), functional_sparsity_target=0.7,
        )
        with pytest.raises(fl.InfeasibleSparsityError):
            fl.generate_model(cfg)


class TestPresets:
    def test_registry_counts(self):
        expected = {
            "XXS": (16, 60), "XS": (46, 180), "S": (92, 364),
            "M": (154, 612), "L": (232, 924), "XL": (326, 1300),
        }
        for name, (m, k) in expected.items():
            p = preset_config(name)
            assert (p.num_modalities, p.total_hidden_states) == (m, k)

    def test_unknown_preset(self):
        with pytest.raises(fl.UnknownPresetError):
            preset_config("XXL")

    def test_xxs_instance_matches_registry(self):
        p, spec = fl.preset("XXS")
        assert spec.num_modalities == 16
        assert spec.total_hidden_states == 60
        assert fl.validate_model(spec) == []

    def test_xxs_sparsity_near_target(self):
        _, spec = fl.preset("XXS")
        achieved = fl.sparsity_stats(spec).sparsity_percent
        assert achieved == pytest.approx(61.0, abs=3.0)

    def test_xxs_param_count_bounds_nonzeros(self):
        _, spec = fl.preset("XXS")
        assert fl.original_param_count(spec) >= fl.sparsity_stats(spec).nonzero


class TestModelFile:
    def test_round_trip_bitwise(self, tmp_path, demo_spec):
        path = tmp_path / "demo.json"
        fl.save_model(demo_spec, path)
        back = fl.load_model(path)
        assert back.factors == demo_spec.factors
        assert back.modalities == demo_spec.modalities
        for a, b in zip(back.likelihoods, demo_spec.likelihoods):
            assert a.values.tobytes() == b.values.tobytes()

    @pytest.mark.parametrize("seed", range(4))
    def test_round_trip_random_models(self, tmp_path, seed):
        spec = small_model(seed, rho=0.3)
        path = tmp_path / f"m{seed}.json"
        fl.save_model(spec, path)
        back = fl.load_model(path)
        for a, b in zip(back.likelihoods, spec.likelihoods):
            assert a.values.tobytes() == b.values.tobytes()

    def test_schema_fields(self, tmp_path, demo_spec):
        path = tmp_path / "demo.json"
        fl.save_model(demo_spec, path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"factors", "modalities", "likelihoods"}
        assert doc["factors"][0] == {"id": 0, "cardinality": 2}
        assert doc["modalities"][1]["deps"] == [0, 1]
        assert doc["likelihoods"][1]["shape"] == [2, 2, 3]
        assert len(doc["likelihoods"][1]["values"]) == 12


class TestBeliefObservationChecks:
    def test_observation_bounds(self, demo_spec):
        from faclik.model import validate_observation, InvalidObservationError

        assert validate_observation(demo_spec, (1, 0)).tolist() == [1, 0]
        with pytest.raises(InvalidObservationError):
            validate_observation(demo_spec, (2, 0))
        with pytest.raises(InvalidObservationError):
            validate_observation(demo_spec, (0,))

    def test_belief_checks(self, demo_spec):
        from faclik.model import validate_beliefs, BeliefShapeError

        ok = validate_beliefs(demo_spec, [np.array([0.5, 0.5]), np.array([0.2, 0.3, 0.5])])
        assert len(ok) == 2
        with pytest.raises(BeliefShapeError):
            validate_beliefs(demo_spec, [np.array([0.5, 0.5])])
        with pytest.raises(BeliefShapeError):
            validate_beliefs(demo_spec, [np.array([0.6, 0.5]), np.array([0.2, 0.3, 0.5])])
