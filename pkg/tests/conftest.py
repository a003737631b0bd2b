import numpy as np
import pytest

from spheresync import EnsembleState, ModelParams, project_admissible
from spheresync.linalg import random_skew_hermitian, random_unit_vector


def random_ensemble(p, seed, w_scale=0.0):
    """Unit-norm positions plus admissible velocities (w_scale adds tangent noise)."""
    rng = np.random.default_rng(seed)
    z = np.stack([random_unit_vector(rng, p.d) for _ in range(p.N)])
    w = np.einsum("jab,jb->ja", p.omegas, z) / p.gamma
    if w_scale > 0:
        w = project_admissible(
            p, z, w + w_scale * (rng.standard_normal(z.shape)
                                 + 1j * rng.standard_normal(z.shape)))
    return EnsembleState(0.0, z, w)


def random_omegas(N, d, scale, seed, common=False):
    rng = np.random.default_rng(seed)
    if common:
        om = random_skew_hermitian(rng, d, scale)
        return np.broadcast_to(om, (N, d + 1, d + 1)).copy()
    return np.stack([random_skew_hermitian(rng, d, scale) for _ in range(N)])


@pytest.fixture
def small_params():
    return ModelParams(N=4, d=2, m=0.5, gamma=1.0, kappa0=1.0, kappa1=0.2)
