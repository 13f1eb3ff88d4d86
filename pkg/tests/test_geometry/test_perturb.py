import jax
import jax.numpy as jnp
import numpy as np
import pytest

from gcckit.enums import PerturbationMode, Regularity
from gcckit.errors import PreconditionError
from gcckit.geometry import flat_metric, lipschitz_perturb
from gcckit.geometry.metric import bound_samples

BOX = ((0.0, 1.0), (0.0, 1.0))


@pytest.fixture
def samples():
    return jnp.asarray(bound_samples(BOX, 21))


def test_zero_perturbation_is_identity():
    metric = flat_metric(2)
    assert lipschitz_perturb(metric, 0.0, seed=3, box=BOX) is metric


@pytest.mark.parametrize("seed", [pytest.param(seed, id=f"seed{seed}") for seed in range(3)])
@pytest.mark.parametrize("mode", [PerturbationMode.CONFORMAL, PerturbationMode.MATRIX])
def test_eigenvalues_stay_in_band(seed, mode, samples):
    perturbed = lipschitz_perturb(flat_metric(2), 0.1, seed=seed, box=BOX, mode=mode)
    eigs = jnp.linalg.eigvalsh(jax.vmap(perturbed.g)(samples))
    assert float(jnp.min(eigs)) >= 0.9 - 1e-12
    assert float(jnp.max(eigs)) <= 1.1 + 1e-12
    assert perturbed.perturbation_distance <= 0.1
    assert perturbed.regularity == Regularity.LIPSCHITZ
    assert perturbed.dg is not None


def test_same_seed_same_field(samples):
    first = lipschitz_perturb(flat_metric(2), 0.05, seed=7, box=BOX)
    second = lipschitz_perturb(flat_metric(2), 0.05, seed=7, box=BOX)
    np.testing.assert_array_equal(
        jax.vmap(first.g)(samples), jax.vmap(second.g)(samples)
    )


def test_large_perturbation_is_rejected():
    with pytest.raises(PreconditionError):
        lipschitz_perturb(flat_metric(2), 0.5, seed=0, box=BOX)


def test_kappa_perturbation(samples):
    perturbed = lipschitz_perturb(flat_metric(2), 0.2, seed=1, box=BOX, perturb_kappa=True)
    kappa = jax.vmap(perturbed.kappa)(samples)
    assert float(jnp.min(kappa)) >= 0.8 - 1e-12
    assert float(jnp.max(jnp.abs(kappa - 1.0))) > 0.0
