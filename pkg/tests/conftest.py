"""Shared fixtures: preset models, assembled systems, random valid specs."""

import numpy as np
import pytest

from phmor.pfem import assemble_fom, build_basis
from phmor.phs import BcPhsSpec, SpatialFunction, preset, validate


def rand_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def rand_spd(rng, n):
    Q = rand_orthogonal(rng, n)
    return (Q * rng.uniform(0.5, 2.0, size=n)) @ Q.T


def rand_skew(rng, n, scale=0.7):
    M = scale * rng.standard_normal((n, n))
    return M - M.T


def random_valid_spec(rng, n1, n2, iep=False):
    """Random two-field system with a structurally admissible boundary pair.

    The port matrices come from transporting the canonical pair
    (u, y) = (boundary flow, boundary effort) by a random symmetry of
    the boundary power form.  That symmetry group is generated by
    block scalings diag(K, K^-T) and unit-triangular blocks with skew
    off-diagonal, so sampling those factors covers a full-dimensional
    family while keeping every factor well conditioned.
    """
    n = n1 + n2
    Q = rand_orthogonal(rng, n)
    d = rng.uniform(0.5, 2.0, size=n) * rng.choice([-1.0, 1.0], size=n)
    P = (Q * d) @ Q.T
    P = 0.5 * (P + P.T)

    Kq1, Kq2 = rand_orthogonal(rng, n), rand_orthogonal(rng, n)
    kd = rng.uniform(0.5, 2.0, size=n)
    K = (Kq1 * kd) @ Kq2
    Kinv_T = (Kq1 * (1.0 / kd)) @ Kq2
    Z1 = rand_skew(rng, n)
    Z2 = rand_skew(rng, n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    M = (
        np.block([[K, zero], [zero, Kinv_T]])
        @ np.block([[eye, Z2], [zero, eye]])
        @ np.block([[eye, zero], [Z1, eye]])
    )
    Rext = np.block([[P, -P], [eye, eye]]) / np.sqrt(2.0)
    W = M @ Rext

    if iep:
        G = rand_skew(rng, n)
    else:
        L = 0.4 * rng.standard_normal((n, n))
        G = rand_skew(rng, n) + L @ L.T

    a = float(rng.uniform(-1.0, 0.5))
    b = a + float(rng.uniform(0.5, 2.0))
    return BcPhsSpec(
        n1=n1,
        n2=n2,
        interval=(a, b),
        P=P,
        G=G,
        H1=SpatialFunction.constant(rand_spd(rng, n1)),
        H2=SpatialFunction.constant(rand_spd(rng, n2)),
        VB=W[:n, :],
        VC=W[n:, :],
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


@pytest.fixture(scope="session")
def wave_neumann_model():
    return validate(preset("wave_neumann"))


@pytest.fixture(scope="session")
def wave_mixed_model():
    return validate(preset("wave_mixed"))


@pytest.fixture(scope="session")
def timoshenko_model():
    return validate(preset("timoshenko"))


def assemble(model, N):
    b1, b2 = build_basis(model, N)
    return assemble_fom(model, b1, b2)


@pytest.fixture(scope="session")
def wave_mixed_fom_100(wave_mixed_model):
    return assemble(wave_mixed_model, 100)


@pytest.fixture(scope="session")
def timoshenko_fom_100(timoshenko_model):
    return assemble(timoshenko_model, 100)
