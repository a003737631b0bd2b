"""Dense complex linear algebra for states in C^(d+1).

The inner product is conjugate-linear in the FIRST argument throughout the
package:

    inner(z, w) = sum_a conj(z^a) * w^a

Matrix exponentials of skew-Hermitian generators are unitary; expm_skew
delegates to scipy's scaling-and-squaring Pade implementation, and
SkewExpFamily provides a cached eigendecomposition path for repeated
exponentials of the same generators at many time arguments.
"""

import numpy as np
import scipy.linalg

from .errors import ValidationError


def inner(z, w):
    """Hermitian inner product, conjugate-linear in the first argument."""
    z = np.asarray(z)
    w = np.asarray(w)
    if z.shape != w.shape:
        raise ValidationError(
            "inner: dimension mismatch %s vs %s" % (z.shape, w.shape)
        )
    return complex(np.sum(np.conj(z) * w))


def frobenius_norm(omega):
    return float(np.sqrt(np.sum(np.abs(np.asarray(omega)) ** 2)))


def expm_skew(omega, s=1.0):
    """Unitary exponential e^(s*omega) of a skew-Hermitian matrix."""
    omega = np.asarray(omega, dtype=complex)
    if not np.isfinite(s):
        raise ValidationError("expm_skew: scale must be finite")
    if not np.all(np.isfinite(omega)):
        raise ValidationError("expm_skew: non-finite matrix entries")
    return scipy.linalg.expm(s * omega)


def random_unit_vector(rng, d):
    """Uniform point on the unit sphere of C^(d+1): normalized complex Gaussian."""
    if d < 0:
        raise ValidationError("random_unit_vector: d must be >= 0")
    v = rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)
    return v / np.linalg.norm(v)


def random_skew_hermitian(rng, d, scale):
    """(A - A^H)/2 for A with entries uniform on the complex disc of radius scale."""
    if scale < 0:
        raise ValidationError("random_skew_hermitian: scale must be >= 0")
    n = d + 1
    r = scale * np.sqrt(rng.random((n, n)))
    phi = 2.0 * np.pi * rng.random((n, n))
    a = r * np.exp(1j * phi)
    return (a - a.conj().T) / 2.0


def is_skew_hermitian(omega, tol=1e-12):
    omega = np.asarray(omega)
    scale = max(1.0, float(np.max(np.abs(omega))) if omega.size else 0.0)
    return float(np.max(np.abs(omega + omega.conj().swapaxes(-1, -2)))) <= tol * scale


class SkewExpFamily:
    """Unitary exponentials e^(s*omega_j) for a fixed stack of generators.

    Each skew-Hermitian omega equals i*H with H Hermitian, so
    e^(s*omega) = V diag(e^(i*s*lam)) V^H from one eigendecomposition per
    generator. The decomposition is computed once at construction; factors()
    then evaluates all N exponentials at any s without calling expm again.
    Agrees with expm_skew to roundoff (tested).
    """

    def __init__(self, omegas):
        omegas = np.asarray(omegas, dtype=complex)
        if omegas.ndim != 3 or omegas.shape[1] != omegas.shape[2]:
            raise ValidationError("SkewExpFamily: expected a (N, D, D) stack")
        if not is_skew_hermitian(omegas):
            raise ValidationError("SkewExpFamily: generators must be skew-Hermitian")
        herm = -1j * omegas
        lam, vec = np.linalg.eigh(herm)
        self._lam = lam            # (N, D) real
        self._vec = vec            # (N, D, D) unitary
        self.shape = omegas.shape

    def factors(self, s):
        """Stack of e^(s*omega_j), shape (N, D, D)."""
        phase = np.exp(1j * s * self._lam)
        return np.einsum("jab,jb,jcb->jac", self._vec, phase, self._vec.conj())

    def apply(self, s, x):
        """e^(s*omega_j) @ x_j for a stack of vectors x, shape (N, D)."""
        y = np.einsum("jba,jb->ja", self._vec.conj(), x)
        y *= np.exp(1j * s * self._lam)
        return np.einsum("jab,jb->ja", self._vec, y)

    def apply_adjoint(self, s, x):
        """e^(-s*omega_j) @ x_j, the adjoint of apply (factors are unitary)."""
        return self.apply(-s, x)
