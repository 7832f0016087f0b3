"""Tangential sampling, divided-difference pencils, interpolants."""

import numpy as np
import pytest

from phmor.errors import (
    CollidingPoints,
    DataModelMismatch,
    NearSingularPencil,
    NonConjugateOrdering,
    RankDeficientData,
    ShapeMismatch,
    ZeroDenominator,
)
from phmor.loewner import (
    TangentialData,
    as_realization,
    bode,
    build_pencil,
    build_projector,
    eval_transfer,
    generate_data,
    real_transform,
    realize,
    svd_truncate,
)
from phmor.simulate import DescriptorSystem, to_descriptor

from conftest import assemble


def scalar_lag():
    # G(s) = 1 / (s + 1)
    return DescriptorSystem(
        E=np.array([[1.0]]),
        A=np.array([[-1.0]]),
        B=np.array([[1.0]]),
        C=np.array([[1.0]]),
    )


def two_pole():
    # G(s) = 1/(s+1) + 1/(s+3), minimal order 2
    return DescriptorSystem(
        E=np.eye(2),
        A=np.diag([-1.0, -3.0]),
        B=np.array([[1.0], [1.0]]),
        C=np.array([[1.0, 1.0]]),
    )


def passive_order4(seed=11):
    # lossless interconnection J with SPD energy weight Q, collocated ports
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((4, 4))
    J = M - M.T
    W = rng.standard_normal((4, 4))
    Q = W @ W.T + 4.0 * np.eye(4)
    B = rng.standard_normal((4, 1))
    return DescriptorSystem(E=np.eye(4), A=J @ Q, B=B, C=B.T @ Q)


def test_eval_transfer_scalar_values():
    sys = scalar_lag()
    assert eval_transfer(sys, 1.0)[0, 0] == pytest.approx(0.5, abs=1e-15)
    g = eval_transfer(sys, 2.0j)[0, 0]
    g_conj = eval_transfer(sys, -2.0j)[0, 0]
    assert g_conj == pytest.approx(np.conj(g), abs=1e-15)
    assert abs(eval_transfer(sys, 1e9)[0, 0]) < 1.1e-9


def test_eval_transfer_on_pole_raises():
    osc = DescriptorSystem(
        E=np.eye(2),
        A=np.array([[0.0, 1.0], [-1.0, 0.0]]),
        B=np.array([[1.0], [0.0]]),
        C=np.array([[1.0, 0.0]]),
    )
    with pytest.raises(NearSingularPencil):
        eval_transfer(osc, 1.0j)


def test_generate_data_layout_scalar():
    sys = scalar_lag()
    data = generate_data(sys, [1.0, 2.0])
    assert np.allclose(data.right_points, [1.0j, -1.0j])
    assert np.allclose(data.left_points, [2.0j, -2.0j])
    assert np.allclose(data.right_dirs, [[1.0, 1.0]])
    g1 = 1.0 / (1.0j + 1.0)
    assert np.allclose(data.right_values, [[g1, np.conj(g1)]])
    g2 = 1.0 / (2.0j + 1.0)
    assert np.allclose(data.left_values, [[g2], [np.conj(g2)]])


def test_generate_data_direction_cycling(wave_mixed_model):
    sys = to_descriptor(assemble(wave_mixed_model, 20))
    data = generate_data(sys, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    # right frequencies 1, 3, 5 with directions e1, e2, e1, pairs adjacent
    assert np.allclose(data.right_points.imag, [1, -1, 3, -3, 5, -5])
    e1 = [1.0, 0.0]
    e2 = [0.0, 1.0]
    assert np.allclose(data.right_dirs.T.real, [e1, e1, e2, e2, e1, e1])
    assert np.allclose(data.left_dirs.real, [e1, e1, e2, e2, e1, e1])


def test_generate_data_bad_frequencies(wave_mixed_model):
    sys = to_descriptor(assemble(wave_mixed_model, 10))
    with pytest.raises(CollidingPoints):
        generate_data(sys, [1.0, 1.0])
    with pytest.raises(CollidingPoints):
        generate_data(sys, [-1.0, 2.0])
    with pytest.raises(ShapeMismatch):
        generate_data(sys, [1.0])


def scalar_data():
    # one right sample G(1) = 1/2, one left sample G(2) = 1/3
    return TangentialData(
        right_points=np.array([1.0 + 0.0j]),
        right_dirs=np.array([[1.0 + 0.0j]]),
        right_values=np.array([[0.5 + 0.0j]]),
        left_points=np.array([2.0 + 0.0j]),
        left_dirs=np.array([[1.0 + 0.0j]]),
        left_values=np.array([[1.0 / 3.0 + 0.0j]]),
    )


def test_scalar_pencil_matrices():
    pencil = build_pencil(scalar_data())
    assert pencil.L[0, 0] == pytest.approx(-1.0 / 6.0, abs=1e-16)
    assert pencil.Ls[0, 0] == pytest.approx(1.0 / 6.0, abs=1e-16)


def test_scalar_realization_interpolates_exactly():
    real = as_realization(build_pencil(scalar_data()))
    assert real.E[0, 0] == pytest.approx(1.0 / 6.0)
    assert real.A[0, 0] == pytest.approx(-1.0 / 6.0)
    assert real.B[0, 0] == pytest.approx(1.0 / 3.0)
    assert real.C[0, 0] == pytest.approx(0.5)
    sys = real.to_descriptor()
    # order-1 interpolant of an order-1 function is the function
    for s in (1.0, 2.0, 5.0, 0.3 + 2.0j):
        assert eval_transfer(sys, s)[0, 0] == pytest.approx(1.0 / (s + 1.0), abs=1e-14)


def test_sylvester_identities(wave_mixed_model):
    sys = to_descriptor(assemble(wave_mixed_model, 30))
    data = generate_data(sys, np.linspace(0.9, 8.5, 8))
    pencil = build_pencil(data, check=True)
    M = np.diag(data.left_points)
    Lam = np.diag(data.right_points)
    vr = data.left_values @ data.right_dirs
    lw = data.left_dirs @ data.right_values
    res1 = np.linalg.norm(M @ pencil.L - pencil.L @ Lam - (vr - lw))
    rhs2 = data.left_points[:, None] * vr - data.right_points[None, :] * lw
    res2 = np.linalg.norm(M @ pencil.Ls - pencil.Ls @ Lam - rhs2)
    scale = max(1.0, np.linalg.norm(vr - lw), np.linalg.norm(rhs2))
    assert res1 <= 1e-12 * scale
    assert res2 <= 1e-12 * scale


def test_confluent_point_consistent_values():
    # left point equal to the right point carries the same sample;
    # the divided difference degenerates to the constant interpolant
    data = TangentialData(
        right_points=np.array([1.0 + 0.0j]),
        right_dirs=np.array([[1.0 + 0.0j]]),
        right_values=np.array([[0.5 + 0.0j]]),
        left_points=np.array([1.0 + 0.0j]),
        left_dirs=np.array([[1.0 + 0.0j]]),
        left_values=np.array([[0.5 + 0.0j]]),
    )
    pencil = build_pencil(data, check=False)
    assert pencil.L[0, 0] == 0.0
    assert pencil.Ls[0, 0] == pytest.approx(0.5)
    sys = as_realization(pencil).to_descriptor()
    assert eval_transfer(sys, 3.0)[0, 0] == pytest.approx(0.5)


def test_confluent_point_inconsistent_values():
    data = TangentialData(
        right_points=np.array([1.0 + 0.0j]),
        right_dirs=np.array([[1.0 + 0.0j]]),
        right_values=np.array([[0.5 + 0.0j]]),
        left_points=np.array([1.0 + 0.0j]),
        left_dirs=np.array([[1.0 + 0.0j]]),
        left_values=np.array([[0.9 + 0.0j]]),
    )
    with pytest.raises(ZeroDenominator):
        build_pencil(data, check=False)


def test_realize_recovers_minimal_system(rng):
    sys = two_pole()
    data = generate_data(sys, [0.7, 1.9])
    real = realize(build_pencil(data))
    rom = real.to_descriptor()
    for _ in range(10):
        s = complex(rng.uniform(0.1, 3.0), rng.uniform(-5.0, 5.0))
        want = eval_transfer(sys, s)
        got = eval_transfer(rom, s)
        assert np.linalg.norm(got - want) <= 1e-8 * max(1.0, np.linalg.norm(want))


def test_realize_rejects_redundant_data():
    sys = two_pole()
    data = generate_data(sys, np.linspace(0.5, 5.0, 6))
    with pytest.raises(RankDeficientData):
        realize(build_pencil(data))


def test_real_transform_preserves_transfer(rng):
    sys = two_pole()
    data = generate_data(sys, [0.7, 1.9])
    real = as_realization(build_pencil(data))
    rr = real_transform(real)
    for M in (rr.E, rr.A, rr.B, rr.C):
        assert M.dtype == np.float64
    rom = rr.to_descriptor()
    for _ in range(10):
        s = complex(rng.uniform(0.1, 3.0), rng.uniform(-5.0, 5.0))
        want = eval_transfer(sys, s)
        got = eval_transfer(rom, s)
        assert np.linalg.norm(got - want) <= 1e-10 * max(1.0, np.linalg.norm(want))


def test_real_transform_rejects_broken_pair_order():
    sys = two_pole()
    data = generate_data(sys, [0.7, 1.9, 3.1, 4.3])
    perm = [0, 2, 1, 3]  # interleave the two pairs: s1, s2, conj(s1), conj(s2)
    broken = TangentialData(
        right_points=data.right_points[perm],
        right_dirs=data.right_dirs[:, perm],
        right_values=data.right_values[:, perm],
        left_points=data.left_points,
        left_dirs=data.left_dirs,
        left_values=data.left_values,
    )
    with pytest.raises(NonConjugateOrdering):
        real_transform(as_realization(build_pencil(broken, check=False)))


def test_svd_truncate_reveals_minimal_order(rng):
    sys = passive_order4()
    data = generate_data(sys, np.geomspace(0.1, 10.0, 12))
    rr = real_transform(as_realization(build_pencil(data)))
    rom, X, Y = svd_truncate(rr, tol_rank=1e-8)
    assert rom.order == 4
    svals = rom.extras["svals_row"]
    assert svals[4] / svals[0] < 1e-8
    assert X.shape == (12, 4) and Y.shape == (12, 4)
    rsys = rom.to_descriptor()
    for _ in range(10):
        s = complex(rng.uniform(0.05, 20.0), rng.uniform(-30.0, 30.0))
        want = eval_transfer(sys, s)
        got = eval_transfer(rsys, s)
        assert np.linalg.norm(got - want) <= 1e-6 * max(1.0, np.linalg.norm(want))


def test_svd_truncate_explicit_order():
    sys = passive_order4()
    data = generate_data(sys, np.geomspace(0.1, 10.0, 12))
    rr = real_transform(as_realization(build_pencil(data)))
    rom, _, _ = svd_truncate(rr, k=3)
    assert rom.order == 3
    with pytest.raises(ShapeMismatch):
        svd_truncate(rr, k=40)


def test_svd_truncate_residuals_at_data():
    sys = two_pole()
    data = generate_data(sys, [0.7, 1.9])
    rr = real_transform(as_realization(build_pencil(data)))
    rom, _, _ = svd_truncate(rr)
    assert rom.order == 2
    assert rom.provenance == "standard"
    assert np.max(rom.fit_residuals) <= 1e-8


def test_projector_identities(wave_mixed_model):
    fom = assemble(wave_mixed_model, 40)
    sys = to_descriptor(fom)
    data = generate_data(sys, np.linspace(0.9, 8.5, 8))
    rr = real_transform(as_realization(build_pencil(data)))
    rom, X, _ = svd_truncate(rr, tol_rank=1e-10)
    T = build_projector(sys, data, X)
    assert T.shape == (80, rom.order)
    assert T.dtype == np.float64


def test_projector_rejects_foreign_data(wave_mixed_model):
    sys = to_descriptor(assemble(wave_mixed_model, 40))
    other = to_descriptor(assemble(wave_mixed_model, 23))
    data = generate_data(sys, np.linspace(0.9, 8.5, 8))
    with pytest.raises(DataModelMismatch):
        build_projector(other, data)


def test_bode_shape(wave_mixed_model):
    sys = to_descriptor(assemble(wave_mixed_model, 15))
    grid = np.geomspace(0.1, 10.0, 7)
    G = bode(sys, grid)
    assert G.shape == (7, 2, 2)
    assert np.allclose(G[3], eval_transfer(sys, 1j * grid[3]))
