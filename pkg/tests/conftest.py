import numpy as np
import pytest

from qubit_aging import IntegrationControls, ModelParams


@pytest.fixture
def fig1_params() -> ModelParams:
    """The reference parameter set used throughout: N=100, Delta=3,
    Omega=3.2, g=0.04, V=0.2, kappa=1."""
    return ModelParams(
        n_qubits=100,
        detuning=3.0,
        drive=3.2,
        coherent_coupling=0.04,
        dissipative_coupling=0.2,
    )


@pytest.fixture
def loose_controls() -> IntegrationControls:
    """Faster controls for shape-level assertions that do not need the
    default 1e-9 settling accuracy."""
    return IntegrationControls(rtol=1e-6, atol=1e-9, steady_tol=1e-7, t_max=150.0)


def random_params(rng: np.random.Generator) -> ModelParams:
    """A generic, well-conditioned random parameter draw."""
    return ModelParams(
        n_qubits=int(rng.integers(2, 200)),
        detuning=float(rng.uniform(-5, 5)),
        drive=float(rng.uniform(0, 5)),
        coherent_coupling=float(rng.uniform(-0.1, 0.1)),
        dissipative_coupling=float(rng.uniform(0, 1)),
        kappa=1.0,
    )
