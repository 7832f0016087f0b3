"""Structure-preserving P1 finite element discretization.

Each of the two field groups is expanded in Lagrange hat functions on a
uniform mesh of the model interval (the meshes may differ in size).
With Phi_i the block-diagonal basis matrix of group i, the assembled
matrices are

    E_i = int Phi_i Phi_i^T            (block mass)
    Q_i = int Phi_i H_i Phi_i^T        (energy weight)
    DP_ij = int Phi_i P_ij d(Phi_j)^T  (transport)
    DG_ij = int Phi_i G_ij Phi_j^T     (interior coupling/dissipation)

plus the boundary trace map Omega = [[Phi1(b), 0, Phi1(a), 0],
[0, Phi2(b), 0, Phi2(a)]].  The discrete system

    E dx/dt = (J - R) e + B u,   E e = Q x,   y = B^T e

with J = DP - (DG - DG^T)/2 - Omega VC^T VB Omega^T,
R = (DG + DG^T)/2 and B = Omega VC^T inherits the continuous energy
balance: dH/dt = u^T y - e^T R e with H = (1/2) x^T Q x.

Mass and transport integrals are exact (closed-form element matrices on
equal meshes, Gauss on the merged mesh otherwise); Q and DG use 3-point
Gauss-Legendre per element, exact for constant coefficients and
adequate for smooth ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidMeshSize, ShapeMismatch, StructureViolation
from .phs import SpatialFunction, ValidatedModel
from .quadrature import GaussRule

__all__ = [
    "HatBasis",
    "AssembledBlocks",
    "AssembledFom",
    "InitialState",
    "build_basis",
    "assemble_blocks",
    "assemble_fom",
    "project_initial",
]


@dataclass(frozen=True)
class HatBasis:
    """P1 hat functions on a uniform mesh with `size` nodes."""

    interval: tuple
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise InvalidMeshSize(f"need at least 2 nodes, got {self.size}")

    @property
    def h(self) -> float:
        a, b = self.interval
        return (b - a) / (self.size - 1)

    @property
    def nodes(self) -> np.ndarray:
        a, b = self.interval
        return np.linspace(a, b, self.size)

    def eval(self, z: float) -> np.ndarray:
        """Values of all hat functions at z."""
        a, b = self.interval
        if not (a - 1e-12 <= z <= b + 1e-12):
            raise ShapeMismatch(f"point {z} outside interval {self.interval}")
        out = np.zeros(self.size)
        t = np.clip((z - a) / self.h, 0.0, self.size - 1.0)
        k = min(int(t), self.size - 2)
        loc = t - k
        out[k] = 1.0 - loc
        out[k + 1] = loc
        return out


def build_basis(model: ValidatedModel, N1: int, N2: int | None = None):
    """Bases for the two field groups (same mesh unless N2 differs)."""
    a, b = model.interval
    b1 = HatBasis((a, b), int(N1))
    b2 = HatBasis((a, b), int(N1 if N2 is None else N2))
    return b1, b2


def _mass_same(basis: HatBasis) -> np.ndarray:
    # Closed-form assembled P1 mass matrix on a uniform mesh.
    N, h = basis.size, basis.h
    M = np.zeros((N, N))
    main = np.full(N, 4.0)
    main[0] = main[-1] = 2.0
    M[np.arange(N), np.arange(N)] = main * h / 6.0
    off = np.full(N - 1, h / 6.0)
    M[np.arange(N - 1), np.arange(1, N)] = off
    M[np.arange(1, N), np.arange(N - 1)] = off
    return M


def _convection_same(basis: HatBasis) -> np.ndarray:
    # Closed-form int phi_i phi_j' on a uniform mesh.
    N = basis.size
    D = np.zeros((N, N))
    D[np.arange(N - 1), np.arange(1, N)] += 0.5
    D[np.arange(1, N), np.arange(N - 1)] -= 0.5
    D[0, 0] -= 0.5
    D[N - 1, N - 1] += 0.5
    return D


def _merged_breakpoints(b1: HatBasis, b2: HatBasis) -> np.ndarray:
    pts = np.union1d(b1.nodes, b2.nodes)
    return pts


def _hat_and_slope(basis: HatBasis, z: float):
    """Hat values and derivatives at an interior quadrature point."""
    a, _ = basis.interval
    N, h = basis.size, basis.h
    vals = np.zeros(N)
    der = np.zeros(N)
    t = (z - a) / h
    k = min(max(int(t), 0), N - 2)
    loc = t - k
    vals[k] = 1.0 - loc
    vals[k + 1] = loc
    der[k] = -1.0 / h
    der[k + 1] = 1.0 / h
    return vals, der


def _cross_matrices(b1: HatBasis, b2: HatBasis, rule: GaussRule):
    """int phi1 phi2^T and int phi1 (phi2')^T on the merged mesh."""
    M = np.zeros((b1.size, b2.size))
    D = np.zeros((b1.size, b2.size))
    pts = _merged_breakpoints(b1, b2)
    for lo, hi in zip(pts[:-1], pts[1:]):
        xs, ws = rule.nodes_weights(lo, hi)
        for x, w in zip(xs, ws):
            v1, _ = _hat_and_slope(b1, x)
            v2, d2 = _hat_and_slope(b2, x)
            M += w * np.outer(v1, v2)
            D += w * np.outer(v1, d2)
    return M, D


def _weighted_group_mass(basis: HatBasis, H: SpatialFunction, rule: GaussRule) -> np.ndarray:
    """Q_i = int Phi_i H_i Phi_i^T with per-element Gauss quadrature."""
    ni = H.shape[0]
    N = basis.size
    Q = np.zeros((ni * N, ni * N))
    nodes = basis.nodes
    for e in range(N - 1):
        xs, ws = rule.nodes_weights(nodes[e], nodes[e + 1])
        for x, w in zip(xs, ws):
            vals, _ = _hat_and_slope(basis, x)
            loc = vals[e : e + 2]
            outer = w * np.outer(loc, loc)
            Hval = H(x)
            for k in range(ni):
                for l in range(ni):
                    if Hval[k, l] == 0.0:
                        continue
                    Q[k * N + e : k * N + e + 2, l * N + e : l * N + e + 2] += (
                        Hval[k, l] * outer
                    )
    return Q


@dataclass(frozen=True)
class AssembledBlocks:
    """Raw block matrices prior to forming the descriptor system."""

    E1: np.ndarray
    E2: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    DP: np.ndarray
    DG: np.ndarray
    Omega: np.ndarray


@dataclass(frozen=True)
class AssembledFom:
    """Discrete system matrices; all square blocks are N_t x N_t."""

    model: ValidatedModel
    basis1: HatBasis
    basis2: HatBasis
    E: np.ndarray
    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    B: np.ndarray

    @property
    def size(self) -> int:
        return self.E.shape[0]

    @property
    def group_sizes(self):
        return (
            self.model.n1 * self.basis1.size,
            self.model.n2 * self.basis2.size,
        )


@dataclass(frozen=True)
class InitialState:
    """Coefficient vector of the projected initial condition."""

    vector: np.ndarray
    split: int

    @property
    def part1(self) -> np.ndarray:
        return self.vector[: self.split]

    @property
    def part2(self) -> np.ndarray:
        return self.vector[self.split :]


def assemble_blocks(
    model: ValidatedModel,
    basis1: HatBasis,
    basis2: HatBasis,
    rule: GaussRule | None = None,
) -> AssembledBlocks:
    """Assemble all element integrals and the boundary trace map."""
    rule = rule or GaussRule(3)
    spec = model.spec
    n1, n2 = spec.n1, spec.n2
    N1, N2 = basis1.size, basis2.size

    same_mesh = N1 == N2
    M11 = _mass_same(basis1)
    M22 = M11 if same_mesh else _mass_same(basis2)
    D11 = _convection_same(basis1)
    D22 = D11 if same_mesh else _convection_same(basis2)
    if same_mesh:
        M12, D12 = M11, D11
        M21, D21 = M11, D11
    else:
        M12, D12 = _cross_matrices(basis1, basis2, rule)
        M21, D21 = _cross_matrices(basis2, basis1, rule)

    E1 = np.kron(np.eye(n1), M11)
    E2 = np.kron(np.eye(n2), M22)
    Q1 = _weighted_group_mass(basis1, spec.H1, rule)
    Q2 = _weighted_group_mass(basis2, spec.H2, rule)

    P, G = spec.P, spec.G
    blocks_p = [
        [np.kron(P[:n1, :n1], D11), np.kron(P[:n1, n1:], D12)],
        [np.kron(P[n1:, :n1], D21), np.kron(P[n1:, n1:], D22)],
    ]
    blocks_g = [
        [np.kron(G[:n1, :n1], M11), np.kron(G[:n1, n1:], M12)],
        [np.kron(G[n1:, :n1], M21), np.kron(G[n1:, n1:], M22)],
    ]
    DP = np.block(blocks_p)
    DG = np.block(blocks_g)

    a, b = model.interval
    phi1_a, phi1_b = basis1.eval(a), basis1.eval(b)
    phi2_a, phi2_b = basis2.eval(a), basis2.eval(b)
    n = spec.n
    Nt = n1 * N1 + n2 * N2
    Omega = np.zeros((Nt, 2 * n))
    Phi1_b = np.kron(np.eye(n1), phi1_b.reshape(-1, 1))
    Phi1_a = np.kron(np.eye(n1), phi1_a.reshape(-1, 1))
    Phi2_b = np.kron(np.eye(n2), phi2_b.reshape(-1, 1))
    Phi2_a = np.kron(np.eye(n2), phi2_a.reshape(-1, 1))
    Omega[: n1 * N1, :n1] = Phi1_b
    Omega[n1 * N1 :, n1:n] = Phi2_b
    Omega[: n1 * N1, n : n + n1] = Phi1_a
    Omega[n1 * N1 :, n + n1 :] = Phi2_a
    return AssembledBlocks(E1=E1, E2=E2, Q1=Q1, Q2=Q2, DP=DP, DG=DG, Omega=Omega)


def _assert_structure(fom_parts, model, blocks):
    E, J, R, Q = fom_parts
    tol = 1e-12
    j_res = np.linalg.norm(J + J.T)
    if j_res > tol * max(1.0, np.linalg.norm(J)):
        raise StructureViolation(f"assembled J is not skew (residual {j_res:.3e})")
    lam_r = np.linalg.eigvalsh(0.5 * (R + R.T))
    if lam_r[0] < -tol * max(1.0, np.linalg.norm(R)):
        raise StructureViolation(f"assembled R has negative eigenvalue {lam_r[0]:.3e}")
    for label, M in (("E", E), ("Q", Q)):
        try:
            scipy.linalg.cholesky(M, lower=True)
        except scipy.linalg.LinAlgError:
            raise StructureViolation(f"assembled {label} is not positive definite") from None
    # Discrete integration-by-parts identity: the symmetric part of the
    # transport block equals the boundary contribution.
    P = model.spec.P
    n = model.n
    PP = np.zeros((2 * n, 2 * n))
    PP[:n, :n] = P
    PP[n:, n:] = -P
    lhs = blocks.DP + blocks.DP.T
    rhs = blocks.Omega @ PP @ blocks.Omega.T
    res = np.linalg.norm(lhs - rhs)
    if res > 1e-10 * max(1.0, np.linalg.norm(rhs)):
        raise StructureViolation(
            f"transport/boundary identity violated (residual {res:.3e}); "
            "check quadrature order"
        )


def assemble_fom(
    model: ValidatedModel,
    basis1: HatBasis,
    basis2: HatBasis | None = None,
    rule: GaussRule | None = None,
) -> AssembledFom:
    """Assemble the discrete port-Hamiltonian system.

    Structure is asserted, not assumed: J must come out skew, R
    positive semidefinite (and exactly zero for models with a lossless
    interior), E and Q positive definite, and the transport block must
    satisfy the discrete integration-by-parts identity.
    """
    basis2 = basis2 or basis1
    blocks = assemble_blocks(model, basis1, basis2, rule)
    spec = model.spec

    E = scipy.linalg.block_diag(blocks.E1, blocks.E2)
    Q = scipy.linalg.block_diag(blocks.Q1, blocks.Q2)
    R = 0.5 * (blocks.DG + blocks.DG.T)
    K = blocks.Omega @ (spec.VC.T @ spec.VB) @ blocks.Omega.T
    J = blocks.DP - 0.5 * (blocks.DG - blocks.DG.T) - K
    B = blocks.Omega @ spec.VC.T

    if model.iep_flag:
        r_norm = np.linalg.norm(R)
        if r_norm > 1e-12 * max(1.0, np.linalg.norm(blocks.DG)):
            raise StructureViolation(
                f"interior marked lossless but R has norm {r_norm:.3e}"
            )
        R = np.zeros_like(R)

    _assert_structure((E, J, R, Q), model, blocks)
    return AssembledFom(
        model=model, basis1=basis1, basis2=basis2, E=E, J=J, R=R, Q=Q, B=B
    )


def project_initial(
    fom: AssembledFom, x0: SpatialFunction, rule: GaussRule | None = None
) -> InitialState:
    """L2-project the initial profile onto the hat bases.

    Solves E_i c = int Phi_i x0_i with one Cholesky factorization of
    each scalar mass matrix, reused across the fields of a group.
    """
    rule = rule or GaussRule(3)
    model = fom.model
    n1, n2 = model.n1, model.n2
    n = model.n
    if x0.shape != (n, 1):
        raise ShapeMismatch(f"initial profile has shape {x0.shape}, expected {(n, 1)}")

    parts = []
    offsets = [(0, n1, fom.basis1), (n1, n2, fom.basis2)]
    for comp_off, ni, basis in offsets:
        N = basis.size
        load = np.zeros((ni, N))
        nodes = basis.nodes
        for e in range(N - 1):
            xs, ws = rule.nodes_weights(nodes[e], nodes[e + 1])
            for x, w in zip(xs, ws):
                vals, _ = _hat_and_slope(basis, x)
                xv = x0(x)[comp_off : comp_off + ni, 0]
                load[:, e : e + 2] += w * np.outer(xv, vals[e : e + 2])
        chol = scipy.linalg.cho_factor(_mass_same(basis), lower=True)
        coeffs = np.vstack([scipy.linalg.cho_solve(chol, load[k]) for k in range(ni)])
        parts.append(coeffs.reshape(-1))
    vector = np.concatenate(parts)
    return InitialState(vector=vector, split=n1 * fom.basis1.size)
