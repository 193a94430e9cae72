import numpy as np
import pytest

import faclik as fl


def demo_model(uniform: bool = False) -> fl.ModelSpec:
    """Two factors (K=2,3); modality 0 (L=2) on factor 0, modality 1 (L=2) on both."""
    if uniform:
        a0 = np.full((2, 2), 0.5)
        a1 = np.full((2, 2, 3), 0.5)
    else:
        a0 = np.array([[0.8, 0.3], [0.2, 0.7]])
        a1 = np.array(
            [
                [[0.5, 0.1, 1.0], [0.75, 0.4, 0.0]],
                [[0.5, 0.9, 0.0], [0.25, 0.6, 1.0]],
            ]
        )
    return fl.ModelSpec(
        factors=(fl.FactorSpec(0, 2), fl.FactorSpec(1, 3)),
        modalities=(fl.ModalitySpec(0, 2, (0,)), fl.ModalitySpec(1, 2, (0, 1))),
        likelihoods=(fl.LikelihoodTensor(0, a0), fl.LikelihoodTensor(1, a1)),
    )


def small_model(seed: int, rho: float | None = None, max_factors: int = 4) -> fl.ModelSpec:
    """Seeded small model: N <= 4 factors, K_n <= 6, M <= 5."""
    shape_rng = np.random.default_rng(seed)
    n = int(shape_rng.integers(1, max_factors + 1))
    if rho is None:
        rho = float(shape_rng.choice([0.0, 0.2, 0.4]))
    cfg = fl.GeneratorConfig(
        seed=seed,
        num_factors=n,
        factor_cardinality_range=(1, 6),
        num_modalities=int(shape_rng.integers(1, 6)),
        outcome_cardinality_range=(2, 6),
        deps_per_modality_range=(1, n),
        functional_sparsity_target=rho,
    )
    return fl.generate_model(cfg)


@pytest.fixture
def demo_spec():
    return demo_model()


@pytest.fixture
def uniform_demo_spec():
    return demo_model(uniform=True)


@pytest.fixture(scope="session")
def impls():
    """Kernel implementations available in this build."""
    return ("python", "compiled") if fl.HAVE_COMPILED else ("python",)
