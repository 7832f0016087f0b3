"""Tangential interpolation of descriptor transfer functions.

Given right data (lambda_j, r_j, w_j = G(lambda_j) r_j) and left data
(mu_i, l_i, v_i = l_i G(mu_i)), the divided-difference matrices

    L_ij  = (v_i r_j - l_i w_j) / (mu_i - lambda_j)
    Ls_ij = (mu_i v_i r_j - lambda_j l_i w_j) / (mu_i - lambda_j)

define the interpolant (E, A, B, C) = (-L, -Ls, V, W) whose transfer
matches all tangential data whenever the pencil has full rank there.
Conjugate-closed data ordered in adjacent (value, conjugate) pairs is
mapped to a real realization by the unitary congruence with blocks
(1/sqrt 2) [[1, -i], [1, i]]; redundant data is compressed by a short
SVD of the stacked [E A] matrices.  The generalized controllability
basis lifts reduced states back to the data-generating model.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import (
    CollidingPoints,
    DataModelMismatch,
    NearSingularPencil,
    NonConjugateOrdering,
    RankDeficientData,
    ShapeMismatch,
    StructureViolation,
    ZeroDenominator,
)
from .simulate import DescriptorSystem

__all__ = [
    "TangentialData",
    "LoewnerPencil",
    "ComplexRealization",
    "RealRealization",
    "Rom",
    "eval_transfer",
    "bode",
    "generate_data",
    "build_pencil",
    "realize",
    "as_realization",
    "real_transform",
    "svd_truncate",
    "build_projector",
]

_CONJ_TOL = 1e-9


def eval_transfer(sys: DescriptorSystem, s: complex, rcond_min: float = 1e-14) -> np.ndarray:
    """Transfer function G(s) = C (sE - A)^-1 B + D at one point.

    The resolvent is LU-factorized once per point; a reciprocal
    condition estimate below `rcond_min` raises NearSingularPencil.
    One step of iterative refinement keeps the solve usable close to
    poles on the imaginary axis, where the passivity certificate has
    to evaluate nearly singular pencils.
    """
    pencil = np.asarray(s * sys.E - sys.A, dtype=complex)
    anorm = np.linalg.norm(pencil, 1)
    lu, piv, info = lapack.zgetrf(pencil)
    if info != 0:
        raise NearSingularPencil(s, 0.0)
    rcond, info = lapack.zgecon(lu, anorm)
    if info != 0 or rcond < rcond_min:
        raise NearSingularPencil(s, float(rcond))
    rhs = np.asarray(sys.B, dtype=complex)
    sol, info = lapack.zgetrs(lu, piv, rhs)
    if info != 0:
        raise NearSingularPencil(s, float(rcond))
    corr, info = lapack.zgetrs(lu, piv, rhs - pencil @ sol)
    if info == 0:
        sol = sol + corr
    return sys.C @ sol + sys.feedthrough()


def bode(sys: DescriptorSystem, omegas) -> np.ndarray:
    """Frequency response G(i omega) stacked along the first axis."""
    return np.array([eval_transfer(sys, 1j * float(w)) for w in omegas])


@dataclass(frozen=True)
class TangentialData:
    """Right/left tangential samples of a transfer function.

    right_points: (q,) complex; right_dirs: (m, q), columns r_j;
    right_values: (p, q), columns w_j.  left_points: (q,) complex;
    left_dirs: (q, p), rows l_i; left_values: (q, m), rows v_i.
    Points are closed under conjugation with each complex value
    immediately followed by its conjugate.
    """

    right_points: np.ndarray
    right_dirs: np.ndarray
    right_values: np.ndarray
    left_points: np.ndarray
    left_dirs: np.ndarray
    left_values: np.ndarray

    @property
    def count(self) -> int:
        return self.right_points.size

    @property
    def n_inputs(self) -> int:
        return self.right_dirs.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.left_dirs.shape[1]


def conjugate_blocks(points: np.ndarray, tol: float = _CONJ_TOL):
    """Split a point list into real singletons and adjacent conjugate pairs."""
    blocks = []
    i = 0
    pts = np.asarray(points, dtype=complex)
    while i < pts.size:
        s = pts[i]
        scale = max(1.0, abs(s))
        if abs(s.imag) <= tol * scale:
            blocks.append(("real", i))
            i += 1
            continue
        if i + 1 >= pts.size or abs(pts[i + 1] - np.conj(s)) > tol * scale:
            raise NonConjugateOrdering(
                f"point {s} at index {i} is not followed by its conjugate"
            )
        blocks.append(("pair", i))
        i += 2
    return blocks


def _real_blend(blocks, size: int) -> np.ndarray:
    """Unitary map with (1/sqrt2) [[1, -i], [1, i]] blocks on pairs."""
    J = np.zeros((size, size), dtype=complex)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for kind, i in blocks:
        if kind == "real":
            J[i, i] = 1.0
        else:
            J[i, i] = inv_sqrt2
            J[i, i + 1] = -1j * inv_sqrt2
            J[i + 1, i] = inv_sqrt2
            J[i + 1, i + 1] = 1j * inv_sqrt2
    return J


def generate_data(sys: DescriptorSystem, freqs) -> TangentialData:
    """Sample the model on the imaginary axis for interpolation.

    The sorted positive frequencies alternate between the right set
    (1st, 3rd, ... entries) and the left set (2nd, 4th, ...).  Every
    frequency contributes the conjugate pair (+i w, -i w), adjacent in
    (value, conjugate) order; directions cycle through the canonical
    unit vectors on the right and their transposes on the left.
    """
    freqs = np.asarray(sorted(float(w) for w in freqs))
    if freqs.size == 0:
        raise ShapeMismatch("need at least one frequency")
    if np.any(freqs <= 0.0):
        raise CollidingPoints("frequencies must be strictly positive")
    if np.unique(freqs).size != freqs.size:
        raise CollidingPoints("duplicate frequencies collide across the two point sets")
    m = sys.n_ports
    p = sys.C.shape[0]

    right_freqs = freqs[0::2]
    left_freqs = freqs[1::2]
    if right_freqs.size == 0 or left_freqs.size == 0:
        raise ShapeMismatch("need at least two frequencies (one per side)")

    rp, rd, rv = [], [], []
    for idx, w in enumerate(right_freqs):
        r = np.zeros(m)
        r[idx % m] = 1.0
        G = eval_transfer(sys, 1j * w)
        resp = G @ r
        rp.extend([1j * w, -1j * w])
        rd.extend([r.astype(complex), r.astype(complex)])
        rv.extend([resp, np.conj(resp)])

    lp, ld, lv = [], [], []
    for idx, w in enumerate(left_freqs):
        l = np.zeros(p)
        l[idx % p] = 1.0
        G = eval_transfer(sys, 1j * w)
        resp = l @ G
        lp.extend([1j * w, -1j * w])
        ld.extend([l.astype(complex), l.astype(complex)])
        lv.extend([resp, np.conj(resp)])

    return TangentialData(
        right_points=np.array(rp),
        right_dirs=np.column_stack(rd),
        right_values=np.column_stack(rv),
        left_points=np.array(lp),
        left_dirs=np.vstack(ld),
        left_values=np.vstack(lv),
    )


@dataclass(frozen=True)
class LoewnerPencil:
    """Divided-difference matrices plus the data they came from."""

    L: np.ndarray
    Ls: np.ndarray
    data: TangentialData


def build_pencil(data: TangentialData, check: bool = True) -> LoewnerPencil:
    """Assemble the divided-difference matrices entry by entry.

    With Lambda/M the diagonal point matrices and V, W, r, l the
    stacked values/directions, the results satisfy the Sylvester
    relations M L - L Lambda = V r - l W and
    M Ls - Ls Lambda = M V r - l W Lambda, which are verified to
    relative 1e-12 when `check` is set.
    """
    lam = data.right_points
    mu = data.left_points
    q = lam.size
    k = mu.size
    if q != k:
        raise ShapeMismatch(f"need matching data counts, got {k} left / {q} right")

    # v_i r_j and l_i w_j contracted over the port dimension.
    vr = data.left_values @ data.right_dirs
    lw = data.left_dirs @ data.right_values
    denom = mu[:, None] - lam[None, :]

    # A left point falling onto a right point makes the divided
    # difference 0/0.  That happens legitimately: re-interpolation data
    # places left points at -conj(s), which collides with s as the
    # point approaches the imaginary axis.  There v_i r_j and l_i w_j
    # agree analytically, the singularity is removable, and the limits
    # are 0 for L and the common value for Ls.  Dividing instead would
    # amplify roundoff in the numerator by 1/|mu - lam|.  Coincident
    # points with disagreeing values have no interpolant at all.
    near = np.abs(denom) <= 1e-8 * (
        np.abs(mu)[:, None] + np.abs(lam)[None, :] + 1.0
    )
    if np.any(near):
        a = vr[near]
        b = lw[near]
        if np.any(np.abs(a - b) > 1e-10 * (np.abs(a) + np.abs(b) + 1.0)):
            raise ZeroDenominator(
                "a left point (nearly) equals a right point with "
                "inconsistent values"
            )
    safe = np.where(near, 1.0, denom)
    L = np.where(near, 0.0, (vr - lw) / safe)
    Ls = np.where(
        near,
        0.5 * (vr + lw),
        (mu[:, None] * vr - lam[None, :] * lw) / safe,
    )

    if check:
        M = np.diag(mu)
        Lam = np.diag(lam)
        rhs1 = vr - lw
        res1 = np.linalg.norm(M @ L - L @ Lam - rhs1)
        rhs2 = mu[:, None] * vr - lam[None, :] * lw
        res2 = np.linalg.norm(M @ Ls - Ls @ Lam - rhs2)
        scale = max(1.0, np.linalg.norm(rhs1), np.linalg.norm(rhs2))
        if max(res1, res2) > 1e-12 * scale:
            raise StructureViolation(
                f"Sylvester residuals too large ({res1:.3e}, {res2:.3e})"
            )
    return LoewnerPencil(L=L, Ls=Ls, data=data)


@dataclass(frozen=True)
class ComplexRealization:
    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    data: TangentialData

    def to_descriptor(self) -> DescriptorSystem:
        return DescriptorSystem(E=self.E, A=self.A, B=self.B, C=self.C)


def as_realization(pencil: LoewnerPencil) -> ComplexRealization:
    """Raw interpolant (E, A, B, C) = (-L, -Ls, V, W), no rank checks."""
    return ComplexRealization(
        E=-pencil.L,
        A=-pencil.Ls,
        B=pencil.data.left_values.copy(),
        C=pencil.data.right_values.copy(),
        data=pencil.data,
    )


def _numerical_rank(M: np.ndarray, tol_rank: float) -> int:
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol_rank * sv[0]))


def realize(
    pencil: LoewnerPencil, tol_rank: float = 1e-8, tol_interp: float = 1e-8
) -> ComplexRealization:
    """Checked interpolant for non-redundant data.

    Verifies the rank conditions rank(s L - Ls) = rank([L Ls]) =
    rank([L; Ls]) = count at every data point (raising
    RankDeficientData otherwise, in which case the SVD compression
    path applies instead) and the interpolation property itself.
    """
    L, Ls = pencil.L, pencil.Ls
    data = pencil.data
    q = data.count
    r_row = _numerical_rank(np.hstack([L, Ls]), tol_rank)
    r_col = _numerical_rank(np.vstack([L, Ls]), tol_rank)
    ranks_at = [
        _numerical_rank(s * L - Ls, tol_rank)
        for s in np.concatenate([data.right_points, data.left_points])
    ]
    if not (r_row == r_col == q and all(r == q for r in ranks_at)):
        raise RankDeficientData(
            f"rank condition fails: row {r_row}, col {r_col}, "
            f"pointwise {sorted(set(ranks_at))}, count {q}"
        )
    real = as_realization(pencil)
    sys = real.to_descriptor()
    for j in range(q):
        w = data.right_values[:, j]
        got = eval_transfer(sys, data.right_points[j]) @ data.right_dirs[:, j]
        if np.linalg.norm(got - w) > tol_interp * max(1.0, np.linalg.norm(w)):
            raise StructureViolation(
                f"right interpolation fails at {data.right_points[j]}"
            )
    for i in range(q):
        v = data.left_values[i]
        got = data.left_dirs[i] @ eval_transfer(sys, data.left_points[i])
        if np.linalg.norm(got - v) > tol_interp * max(1.0, np.linalg.norm(v)):
            raise StructureViolation(
                f"left interpolation fails at {data.left_points[i]}"
            )
    return real


@dataclass(frozen=True)
class RealRealization:
    """Real form of a conjugate-closed complex interpolant."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    data: TangentialData
    right_blend: np.ndarray
    left_blend: np.ndarray

    def to_descriptor(self) -> DescriptorSystem:
        return DescriptorSystem(E=self.E, A=self.A, B=self.B, C=self.C)


def _check_conjugate_consistency(points, blocks, dirs, values, axis: int):
    """Directions/values of a conjugate pair must themselves be conjugate."""
    for kind, i in blocks:
        if kind != "pair":
            continue
        if axis == 1:
            d_ok = np.allclose(dirs[:, i + 1], np.conj(dirs[:, i]), atol=1e-9)
            v_ok = np.allclose(values[:, i + 1], np.conj(values[:, i]), atol=1e-9)
        else:
            d_ok = np.allclose(dirs[i + 1], np.conj(dirs[i]), atol=1e-9)
            v_ok = np.allclose(values[i + 1], np.conj(values[i]), atol=1e-9)
        if not (d_ok and v_ok):
            raise NonConjugateOrdering(
                f"directions/values at pair {points[i]} are not conjugates"
            )


def real_transform(real: ComplexRealization, tol_imag: float = 1e-12) -> RealRealization:
    """Congruence with the pair-blending unitary; the result is real.

    The data must be conjugate closed with pairs adjacent; the leftover
    imaginary parts (checked against `tol_imag` relative to the matrix
    scale) are discarded.  The transfer function is unchanged, being a
    similarity transform of the complex interpolant.
    """
    data = real.data
    rb = conjugate_blocks(data.right_points)
    lb = conjugate_blocks(data.left_points)
    _check_conjugate_consistency(data.right_points, rb, data.right_dirs, data.right_values, axis=1)
    _check_conjugate_consistency(data.left_points, lb, data.left_dirs, data.left_values, axis=0)
    Jr = _real_blend(rb, data.count)
    Jl = _real_blend(lb, data.count)

    out = {}
    for name, M in (
        ("E", Jl.conj().T @ real.E @ Jr),
        ("A", Jl.conj().T @ real.A @ Jr),
        ("B", Jl.conj().T @ real.B),
        ("C", real.C @ Jr),
    ):
        scale = max(1.0, np.max(np.abs(M)))
        imag_max = float(np.max(np.abs(M.imag)))
        if imag_max > tol_imag * scale:
            raise NonConjugateOrdering(
                f"real transform left imaginary residue {imag_max:.3e} in {name}; "
                "data ordering is not conjugate-consistent"
            )
        out[name] = M.real.copy()
    return RealRealization(
        E=out["E"], A=out["A"], B=out["B"], C=out["C"],
        data=data, right_blend=Jr, left_blend=Jl,
    )


@dataclass(frozen=True)
class Rom:
    """Reduced-order model in real descriptor form.

    provenance is "standard" for SVD-compressed interpolants and
    "spectral_zero" for passivity-enforcing re-interpolants; T, when
    present, lifts reduced states to the data-generating model's state
    space.  fit_residuals holds the relative tangential interpolation
    errors at the right data points.
    """

    Er: np.ndarray
    Ar: np.ndarray
    Br: np.ndarray
    Cr: np.ndarray
    D: np.ndarray | None
    provenance: str
    data: TangentialData
    T: np.ndarray | None = None
    fit_residuals: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return self.Er.shape[0]

    def to_descriptor(self) -> DescriptorSystem:
        return DescriptorSystem(E=self.Er, A=self.Ar, B=self.Br, C=self.Cr, D=self.D)

    def with_projector(self, T: np.ndarray) -> "Rom":
        return replace(self, T=T)


def _fit_residuals(sys: DescriptorSystem, data: TangentialData) -> np.ndarray:
    res = np.empty(data.count)
    for j in range(data.count):
        w = data.right_values[:, j]
        try:
            got = eval_transfer(sys, data.right_points[j]) @ data.right_dirs[:, j]
            res[j] = np.linalg.norm(got - w) / max(1.0, np.linalg.norm(w))
        except NearSingularPencil:
            res[j] = np.inf
    return res


def svd_truncate(
    rr: RealRealization,
    tol_rank: float = 1e-8,
    k: int | None = None,
):
    """Compress a (possibly redundant) real interpolant.

    Short SVDs of [E A] and [E; A] give the projection bases Y and X;
    the retained order is the number of singular values above
    tol_rank * sigma_max unless `k` is fixed by the caller.  Returns
    (Rom, X, Y) together with the singular values in Rom.extras.
    """
    row = np.hstack([rr.E, rr.A])
    col = np.vstack([rr.E, rr.A])
    U, s_row, _ = np.linalg.svd(row, full_matrices=False)
    _, s_col, Vh = np.linalg.svd(col, full_matrices=False)
    if k is None:
        if s_row[0] == 0.0:
            raise RankDeficientData("zero pencil")
        k = int(np.count_nonzero(s_row > tol_rank * s_row[0]))
        if k == 0:
            raise RankDeficientData("no singular values above tolerance")
    if not 1 <= k <= rr.E.shape[0]:
        raise ShapeMismatch(f"requested order {k} out of range")
    Y = U[:, :k]
    X = Vh[:k, :].T
    Er = Y.T @ rr.E @ X
    Ar = Y.T @ rr.A @ X
    Br = Y.T @ rr.B
    Cr = rr.C @ X

    # A rank-deficient Er is legitimate here: it makes the reduced model
    # improper but the pencil (Er, Ar) stays regular whenever the data
    # supports the order, so evaluation and time stepping go through.
    # The singular values are kept as a diagnostic.
    rom = Rom(
        Er=Er, Ar=Ar, Br=Br, Cr=Cr, D=None,
        provenance="standard", data=rr.data,
        fit_residuals=None,
        extras={
            "svals_row": s_row,
            "svals_col": s_col,
            "svals_Er": np.linalg.svd(Er, compute_uv=False),
        },
    )
    rom = replace(rom, fit_residuals=_fit_residuals(rom.to_descriptor(), rr.data))
    return rom, X, Y


def _tangential_bases(fom: DescriptorSystem, data: TangentialData):
    """Generalized controllability/observability bases at the data points."""
    N = fom.order
    q = data.count
    Cb = np.empty((N, q), dtype=complex)
    Ob = np.empty((q, N), dtype=complex)
    for j in range(q):
        pencil = data.right_points[j] * fom.E - fom.A
        Cb[:, j] = np.linalg.solve(pencil, fom.B @ data.right_dirs[:, j])
    for i in range(q):
        pencil = data.left_points[i] * fom.E - fom.A
        Ob[i, :] = np.linalg.solve(pencil.T, fom.C.T @ data.left_dirs[i])
    return Cb, Ob


def build_projector(
    fom: DescriptorSystem,
    data: TangentialData,
    X: np.ndarray | None = None,
    tol_identity: float = 1e-8,
    tol_imag: float = 1e-10,
    check_identities: bool = True,
) -> np.ndarray:
    """Lifting map T from reduced coordinates to the FOM state space.

    T = Cb J X (or Cb J when no SVD factor applies), with Cb the
    generalized controllability basis at the right data points and J
    the pair-blending unitary.  With check_identities the divided
    differences E_l = Ob E Cb, A_l = Ob A Cb, B_l = Ob B, C_l = C Cb
    are verified against the pencil built from the data; a mismatch
    means the data did not come from this model.  Data sampled from a
    different (for example shifted or re-interpolated) transfer cannot
    satisfy them, so such callers disable the check and the lift is
    approximate.
    """
    if check_identities:
        # Feedthrough does not enter the divided differences below, so
        # a model with D != 0 cannot reproduce data that includes it.
        if fom.D is not None and np.linalg.norm(fom.feedthrough()) > 0.0:
            raise DataModelMismatch(
                "projector construction expects a strictly proper model"
            )
        pencil = build_pencil(data, check=False)
        Cb, Ob = _tangential_bases(fom, data)
        E_l, A_l = -pencil.L, -pencil.Ls
        B_l = data.left_values
        C_l = data.right_values
        checks = [
            ("E", Ob @ fom.E @ Cb, E_l),
            ("A", Ob @ fom.A @ Cb, A_l),
            ("B", Ob @ fom.B, B_l),
            ("C", fom.C @ Cb, C_l),
        ]
        for name, got, want in checks:
            res = np.linalg.norm(got - want) / max(1.0, np.linalg.norm(want))
            if res > tol_identity:
                raise DataModelMismatch(
                    f"divided-difference identity for {name} fails "
                    f"(residual {res:.3e}); data was not generated by this model"
                )
    else:
        Cb, _ = _tangential_bases(fom, data)
    Jr = _real_blend(conjugate_blocks(data.right_points), data.count)
    T = Cb @ Jr
    if X is not None:
        T = T @ X
    imag_max = float(np.max(np.abs(T.imag)))
    if imag_max > tol_imag * max(1.0, np.max(np.abs(T))):
        raise NonConjugateOrdering(
            f"projector has imaginary residue {imag_max:.3e}"
        )
    return T.real.copy()
