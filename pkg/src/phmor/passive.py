"""Passivity enforcement by re-interpolation at spectral zeros.

The spectral zeros of a shifted reduced model G(s) + Dr (with
Dr + Dr^T positive definite) are the finite eigenvalues of a
structured pencil of size 2r + m built from the realization; the
right-half-plane zeros and the port blocks of their eigenvectors
supply interpolation points and tangential directions.  Rebuilding a
Loewner interpolant from data at those points and shifting the
feedthrough back yields a model that a frequency-grid certificate can
check for passivity.  A Hermitian variant of the same divided
differences exposes an explicit energy form when it is definite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    CertificateFailure,
    EigensolveFailure,
    EmptyZeroSet,
    NearSingularPencil,
    NotDefinite,
    ShapeMismatch,
    StructureViolation,
)
from .loewner import (
    Rom,
    _fit_residuals,
    _real_blend,
    conjugate_blocks,
    TangentialData,
    build_pencil,
    build_projector,
    eval_transfer,
    real_transform,
    realize,
)
from .simulate import DescriptorSystem

__all__ = [
    "SpectralZeroSet",
    "PassivityCertificate",
    "PhForm",
    "spectral_zeros",
    "passivity_check",
    "passive_reduce",
    "extract_ph",
    "default_shift",
]

_BETA_TOL = 1e-10
_S_CUTOFF = 1e8


def default_shift(n_ports: int, scale: float = 1e-5) -> np.ndarray:
    """Small symmetric positive definite feedthrough shift."""
    return scale * np.eye(n_ports)


@dataclass(frozen=True)
class SpectralZeroSet:
    """Retained right-half-plane spectral zeros with directions.

    zeros is conjugate-closed with each complex zero immediately
    followed by its conjugate; directions has unit-norm columns
    matching the zeros.  Dr is the feedthrough shift that produced
    them.
    """

    zeros: np.ndarray
    directions: np.ndarray
    Dr: np.ndarray

    @property
    def count(self) -> int:
        return self.zeros.size


def _phase_fix(v: np.ndarray) -> np.ndarray:
    """Unit norm with the largest entry rotated to the positive real axis."""
    nrm = np.linalg.norm(v)
    v = v / nrm
    k = int(np.argmax(np.abs(v)))
    piv = v[k]
    return v * (np.conj(piv) / abs(piv))


def spectral_zeros(
    rom: Rom | DescriptorSystem,
    Dr: np.ndarray,
    max_count: int | None = None,
    tol_resid: float = 1e-6,
) -> SpectralZeroSet:
    """Finite right-half-plane zeros of the Popov function of G + Dr.

    Solves the generalized eigenproblem

        [[0, A, B], [A^T, 0, C^T], [B^T, C, Ds]] z = s [[0, E, 0], [-E^T, 0, 0], [0, 0, 0]] z

    with Ds = (D+Dr) + (D+Dr)^T.  The right-hand matrix is singular,
    so infinite eigenvalues are filtered by the QZ beta magnitude and a
    |s| cutoff; directions come from the trailing port block of the
    eigenvectors, renormalized.  Each survivor must annihilate the
    Popov function along its direction to within tol_resid, which
    weeds out leaked near-infinite eigenvalues.  Conjugate closure is
    enforced exactly by pairing each retained zero with Im > 0 with
    its synthesized conjugate, and max_count bounds how many points
    are kept (smallest modulus first, pairs kept whole).
    """
    sys = rom.to_descriptor() if isinstance(rom, Rom) else rom
    E, A, B, C = sys.E, sys.A, sys.B, sys.C
    r = sys.order
    m = sys.n_ports
    Dr = np.asarray(Dr, dtype=float)
    if Dr.shape != (m, m):
        raise ShapeMismatch(f"shift must be {m}x{m}, got {Dr.shape}")
    Ds = sys.feedthrough() + Dr
    Ds = Ds + Ds.T
    if np.min(np.linalg.eigvalsh(Ds)) <= 0.0:
        raise NotDefinite("shifted feedthrough Dr + Dr^T must be positive definite")

    Z = np.zeros
    M = np.block([
        [Z((r, r)), A, B],
        [A.T, Z((r, r)), C.T],
        [B.T, C, Ds],
    ])
    N = np.block([
        [Z((r, r)), E, Z((r, m))],
        [-E.T, Z((r, r)), Z((r, m))],
        [Z((m, r)), Z((m, r)), Z((m, m))],
    ])
    try:
        (alpha, beta), vecs = scipy.linalg.eig(M, N, homogeneous_eigvals=True)
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(f"QZ iteration failed: {exc}") from exc

    beta_scale = max(np.max(np.abs(beta)), 1e-300)
    finite = np.abs(beta) > _BETA_TOL * beta_scale
    s_all = np.full(alpha.shape, np.inf, dtype=complex)
    s_all[finite] = alpha[finite] / beta[finite]
    keep = finite & (np.abs(s_all) <= _S_CUTOFF) & (s_all.real > 0.0)

    cand = []
    for idx in np.nonzero(keep)[0]:
        s = s_all[idx]
        z = vecs[:, idx]
        rblk = z[2 * r:]
        if np.linalg.norm(rblk) <= 1e-8 * np.linalg.norm(z):
            warnings.warn(
                f"dropping spectral zero {s}: degenerate direction block",
                stacklevel=2,
            )
            continue
        cand.append((s, _phase_fix(rblk)))
    if not cand:
        raise EmptyZeroSet(
            "no finite right-half-plane spectral zeros retained "
            f"(pencil size {2 * r + m}, {int(np.count_nonzero(finite))} finite eigenvalues)"
        )

    # A genuine zero annihilates the Popov function along its
    # direction.  Eigenvalues that survive the magnitude filters
    # without being zeros (they appear when E is close to singular)
    # miss this by many orders of magnitude, so the residual separates
    # them cleanly.
    shifted = DescriptorSystem(E=E, A=A, B=B, C=C, D=sys.feedthrough() + Dr)
    checked = []
    for s, d in cand:
        try:
            resid = np.linalg.norm(
                eval_transfer(shifted, s) @ d
                + eval_transfer(shifted, -np.conj(s)).conj().T @ d
            )
        except NearSingularPencil:
            warnings.warn(
                f"dropping spectral zero {s}: transfer not evaluable there",
                stacklevel=2,
            )
            continue
        if resid > tol_resid:
            warnings.warn(
                f"dropping spectral zero {s}: Popov direction residual {resid:.3e}",
                stacklevel=2,
            )
            continue
        checked.append((s, d))
    cand = checked
    if not cand:
        raise EmptyZeroSet("no spectral zero passed the direction residual test")

    reals, upper, lower = [], [], []
    for s, d in cand:
        if abs(s.imag) <= 1e-8 * max(1.0, abs(s)):
            reals.append((s.real, d))
        elif s.imag > 0.0:
            upper.append((s, d))
        else:
            lower.append((s, d))
    if len(upper) != len(lower):
        warnings.warn(
            f"asymmetric conjugate counts ({len(upper)} upper, {len(lower)} lower); "
            "closure is synthesized from the upper half plane",
            stacklevel=2,
        )

    units = []
    for s, d in sorted(reals, key=lambda t: t[0]):
        dr_ = d.real
        if np.linalg.norm(dr_) <= 1e-6:
            warnings.warn(f"dropping real zero {s}: direction has no real part", stacklevel=2)
            continue
        units.append([(complex(s), dr_ / np.linalg.norm(dr_))])
    for s, d in sorted(upper, key=lambda t: (t[0].imag, t[0].real)):
        units.append([(s, d), (np.conj(s), np.conj(d))])

    # The interpolation step downstream can use at most as many points
    # as the degree of the transfer the zeros came from, so cap the
    # count, preferring small |s| (near the band) and never splitting a
    # conjugate pair.
    total = sum(len(u) for u in units)
    if max_count is not None and total > max_count:
        order = sorted(range(len(units)), key=lambda i: abs(units[i][0][0]))
        kept, budget = set(), max_count
        for i in order:
            if len(units[i]) <= budget:
                kept.add(i)
                budget -= len(units[i])
        dropped = [units[i][0][0] for i in range(len(units)) if i not in kept]
        warnings.warn(
            f"zero set ({total}) exceeds the supported count ({max_count}); "
            f"dropping {dropped}",
            stacklevel=2,
        )
        units = [u for i, u in enumerate(units) if i in kept]

    zs = [s for u in units for s, _ in u]
    ds = [d for u in units for _, d in u]
    if not zs:
        raise EmptyZeroSet("all candidate spectral zeros were degenerate")
    return SpectralZeroSet(
        zeros=np.array(zs), directions=np.column_stack(ds), Dr=Dr.copy()
    )


@dataclass(frozen=True)
class PassivityCertificate:
    """Grid certificate: Popov eigenvalue minima plus pencil stability."""

    grid: np.ndarray
    min_popov_eig: np.ndarray
    spectral_abscissa: float
    verdict: str
    tol_pop: float
    tol_stab: float

    @property
    def worst(self) -> tuple[float, float]:
        """(frequency, Popov minimum) at the worst evaluated grid point."""
        k = int(np.nanargmin(self.min_popov_eig))
        return float(self.grid[k]), float(self.min_popov_eig[k])


def passivity_check(
    sys: DescriptorSystem,
    grid: np.ndarray | None = None,
    tol_pop: float = 1e-8,
    tol_stab: float = 1e-8,
) -> PassivityCertificate:
    """Grid test of G(iw) + G(iw)* definiteness plus pencil stability.

    The verdict is passive when the smallest Popov eigenvalue over the
    grid stays above -tol_pop and the finite spectral abscissa of
    (A, E) is at most tol_stab; a clear violation of either gives
    not_passive, and evaluation failures downgrade to inconclusive.
    """
    if grid is None:
        grid = np.logspace(-2.0, 3.0, 400)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ShapeMismatch("certification grid must be nonempty")

    mins = np.full(grid.size, np.nan)
    skipped = 0
    for k, w in enumerate(grid):
        try:
            G = eval_transfer(sys, 1j * w)
        except Exception:
            skipped += 1
            continue
        mins[k] = float(np.min(np.linalg.eigvalsh(G + G.conj().T)))

    abscissa = -np.inf
    solve_failed = False
    try:
        alpha, beta = scipy.linalg.eig(
            sys.A, sys.E, right=False, homogeneous_eigvals=True
        )
        beta_scale = max(np.max(np.abs(beta)), 1e-300)
        finite = np.abs(beta) > _BETA_TOL * beta_scale
        if np.any(finite):
            s = alpha[finite] / beta[finite]
            s = s[np.abs(s) <= _S_CUTOFF]
            if s.size:
                abscissa = float(np.max(s.real))
    except np.linalg.LinAlgError:
        solve_failed = True
        abscissa = np.nan

    evaluated = mins[~np.isnan(mins)]
    popov_bad = evaluated.size and float(np.min(evaluated)) < -tol_pop
    stab_bad = (not solve_failed) and np.isfinite(abscissa) and abscissa > tol_stab
    if popov_bad or stab_bad:
        verdict = "not_passive"
    elif skipped or solve_failed or evaluated.size == 0:
        verdict = "inconclusive"
    else:
        verdict = "passive"
    return PassivityCertificate(
        grid=grid,
        min_popov_eig=mins,
        spectral_abscissa=abscissa,
        verdict=verdict,
        tol_pop=tol_pop,
        tol_stab=tol_stab,
    )


def _zero_data(
    shifted: DescriptorSystem, zset: SpectralZeroSet, left_eval: str
) -> TangentialData:
    """Tangential data at spectral zeros for the re-interpolation.

    Right data samples the shifted transfer at the zeros along their
    directions.  Left data sits at the mirror points -conj(s); the
    default "zero" variant reuses the evaluation at the zero itself
    (l_i applied to G(s_i)), while "mirror" replaces the left values by
    -w_i^H, which is what evaluating at the mirror point returns when
    (s_i, r_i) annihilates the Popov function exactly.  Using the
    identity instead of a second solve keeps the left values consistent
    with the right ones to machine precision, which the structured
    rebuild below depends on.
    """
    if left_eval not in ("zero", "mirror"):
        raise ShapeMismatch(f"unknown left_eval variant {left_eval!r}")
    zs = zset.zeros
    dirs = zset.directions
    k = zs.size
    m = shifted.n_ports
    rv = np.empty((m, k), dtype=complex)
    j = 0
    while j < k:
        rv[:, j] = eval_transfer(shifted, zs[j]) @ dirs[:, j]
        if abs(zs[j].imag) > 0.0 and j + 1 < k and zs[j + 1] == np.conj(zs[j]):
            # synthesize the conjugate sample instead of solving again
            rv[:, j + 1] = np.conj(rv[:, j])
            j += 2
        else:
            if np.max(np.abs(dirs[:, j].imag)) == 0.0:
                rv[:, j] = rv[:, j].real
            j += 1
    if left_eval == "mirror":
        lv = -rv.conj().T
    else:
        lv = np.empty((k, m), dtype=complex)
        for i in range(k):
            lv[i] = np.conj(dirs[:, i]) @ eval_transfer(shifted, zs[i])
    return TangentialData(
        right_points=zs.copy(),
        right_dirs=dirs.copy(),
        right_values=rv,
        left_points=-np.conj(zs),
        left_dirs=np.conj(dirs).T.copy(),
        left_values=lv,
    )


def _mirror_divided_differences(pts: np.ndarray, R: np.ndarray, W: np.ndarray):
    """Hermitian/skew-Hermitian divided differences of mirror data.

    With left values pinned to -w_i^H the Loewner matrix becomes
    (w_i^H r_j + r_i^H w_j) / (conj(s_i) + s_j), Hermitian by
    inspection, and its shifted companion skew-Hermitian.  Any
    realization built on them has a symmetric E block and a skew A
    block, hence purely imaginary poles and an identically vanishing
    Popov function: the structure, not the data values, carries the
    passivity.
    """
    den = np.conj(pts)[:, None] + pts[None, :]
    WhR = W.conj().T @ R
    RhW = R.conj().T @ W
    L = (WhR + RhW) / den
    Ls = (pts[None, :] * RhW - np.conj(pts)[:, None] * WhR) / den
    return L, Ls


_AXIS_CLIP = 1e-6


def passive_reduce(
    rom: Rom,
    Dr: np.ndarray | None = None,
    fom_context: DescriptorSystem | None = None,
    left_eval: str = "zero",
    grid: np.ndarray | None = None,
    tol_pop: float = 1e-8,
    tol_stab: float = 1e-8,
    pick_tol: float = 1e-12,
    certify: bool = True,
) -> Rom:
    """Re-interpolate a reduced model at its shifted spectral zeros.

    Steps: shift the transfer by Dr, compute the right-half-plane
    spectral zeros and directions, sample tangential data there,
    rebuild the divided-difference pencil, and fold D = -Dr into the
    result so its transfer matches the shifted interpolant minus Dr.

    With the default left_eval="zero" the left values follow the
    evaluation at the zero itself and the rebuild goes through the
    plain pencil realization (no SVD compression at this stage).  With
    left_eval="mirror" the left values are the mirror-point ones, the
    divided differences become a Hermitian/skew-Hermitian pair, and
    the realization is assembled by congruence on the eigenspace of
    the Hermitian matrix whose sign dominates, dropping eigenvalues
    below pick_tol relative.  That realization has a symmetric
    definite E, skew A and B = -C^T, so its Popov function vanishes
    identically and its poles sit on the imaginary axis: the shifted
    rebuild is conservative by construction and the final model can
    dip below zero only by the 2 Dr it gives back.  Keep the shift
    scale at or below half of tol_pop when a passing certificate is
    required.

    The outcome must pass the grid certificate unless certify=False,
    otherwise CertificateFailure reports the worst frequency.  With
    fom_context a lifting projector from the generalized
    controllability basis at the zeros is attached.
    """
    m = rom.Br.shape[1]
    if Dr is None:
        Dr = default_shift(m)
    Dr = np.asarray(Dr, dtype=float)
    # The plain realization needs at most as many points as the degree
    # of the parent transfer; the structured path prunes through the
    # eigenvalue cut instead.
    zset = spectral_zeros(rom, Dr, max_count=None if left_eval == "mirror" else rom.order)

    base_D = rom.D if rom.D is not None else np.zeros((rom.Cr.shape[0], m))
    shifted = DescriptorSystem(
        E=rom.Er, A=rom.Ar, B=rom.Br, C=rom.Cr, D=base_D + Dr
    )
    extras = {"zeros": zset, "left_eval": left_eval, "parent_order": rom.order}

    if left_eval == "mirror":
        # Divided differences between s and -conj(s) of a near-axis
        # zero run over a gap of 2 Re(s); keep the evaluation points a
        # resolvable distance off the axis so those entries stay
        # meaningful.  The data then belongs to a zero displaced by at
        # most the clip, which perturbs values at the same order.
        clipped = SpectralZeroSet(
            zeros=zset.zeros.real.clip(_AXIS_CLIP) + 1j * zset.zeros.imag,
            directions=zset.directions,
            Dr=zset.Dr,
        )
        data = _zero_data(shifted, clipped, "mirror")
        L, Ls = _mirror_divided_differences(
            data.right_points, data.right_dirs, data.right_values
        )
        blocks = conjugate_blocks(data.right_points)
        J = _real_blend(blocks, data.count)
        LR = J.conj().T @ L @ J
        SR = J.conj().T @ Ls @ J
        VR = J.conj().T @ data.left_values
        WR = data.right_values @ J
        worst = max(
            float(np.max(np.abs(M.imag))) / max(1.0, float(np.max(np.abs(M))))
            for M in (LR, SR, VR, WR)
        )
        if worst > 1e-10:
            raise StructureViolation(
                f"mirror data lost conjugate consistency (imaginary residue {worst:.3e})"
            )
        LR = 0.5 * (LR.real + LR.real.T)
        SR = 0.5 * (SR.real - SR.real.T)
        VR = 0.5 * (VR.real - WR.real.T)
        WR = -VR.T

        lam, U = np.linalg.eigh(LR)
        sign = 1.0 if lam[-1] >= -lam[0] else -1.0
        spec = sign * lam
        keep = spec > pick_tol * spec.max()
        if not np.any(keep):
            raise NotDefinite("Hermitian divided differences have no definite part")
        Up = U[:, keep]
        Er = Up.T @ (-LR) @ Up
        Er = 0.5 * (Er + Er.T)
        Ar = Up.T @ (-SR) @ Up
        Ar = 0.5 * (Ar - Ar.T)
        Br = Up.T @ VR
        Cr = -Br.T
        extras["pick_spectrum"] = lam
        extras["pick_cut"] = int(np.sum(~keep))
        X_lift = Up
    else:
        data = _zero_data(shifted, zset, left_eval)
        pencil = build_pencil(data)
        rr = real_transform(realize(pencil))
        Er, Ar, Br, Cr = rr.E, rr.A, rr.B, rr.C
        X_lift = None

    T = None
    if fom_context is not None:
        T = build_projector(fom_context, data, X=X_lift, check_identities=False)

    out = Rom(
        Er=Er,
        Ar=Ar,
        Br=Br,
        Cr=Cr,
        D=-Dr,
        provenance="spectral_zero",
        data=data,
        T=T,
        fit_residuals=_fit_residuals(DescriptorSystem(E=Er, A=Ar, B=Br, C=Cr), data),
        extras=extras,
    )
    cert = passivity_check(out.to_descriptor(), grid=grid, tol_pop=tol_pop, tol_stab=tol_stab)
    out.extras["certificate"] = cert
    if certify and cert.verdict != "passive":
        w_bad, p_bad = cert.worst
        raise CertificateFailure(
            f"re-interpolated model fails certification: verdict {cert.verdict}, "
            f"min Popov eigenvalue {p_bad:.3e} at {w_bad:.3e} rad/s, "
            f"spectral abscissa {cert.spectral_abscissa:.3e}"
        )
    return out


@dataclass(frozen=True)
class PhForm:
    """Explicit energy form E x' = (J - R) Q x + B u, y = B^T Q x."""

    E: np.ndarray
    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    orientation: int

    def to_descriptor(self) -> DescriptorSystem:
        return DescriptorSystem(
            E=self.E, A=(self.J - self.R) @ self.Q, B=self.B, C=self.B.T @ self.Q
        )


def _collocated_factors(rom: Rom, tol_structure: float) -> PhForm | None:
    """Read the factors straight off a realization that already has them.

    Tries both state-equation signs; a match needs E symmetric
    positive semidefinite and C = B^T after the flip.  Returns None
    when neither sign fits, leaving the divided-difference route to
    the caller.
    """
    scale_e = max(1.0, float(np.linalg.norm(rom.Er)))
    scale_a = max(1.0, float(np.linalg.norm(rom.Ar)))
    scale_c = max(1.0, float(np.linalg.norm(rom.Cr)))
    for q in (1, -1):
        E = q * rom.Er
        if np.linalg.norm(E - E.T) > tol_structure * scale_e:
            return None
        if np.linalg.norm(rom.Cr - q * rom.Br.T) > tol_structure * scale_c:
            continue
        E = 0.5 * (E + E.T)
        if float(np.min(np.linalg.eigvalsh(E))) < -tol_structure * scale_e:
            continue
        A = q * rom.Ar
        J = 0.5 * (A - A.T)
        R = -0.5 * (A + A.T)
        rmin = float(np.min(np.linalg.eigvalsh(R)))
        if rmin < -tol_structure * scale_a:
            raise StructureViolation(
                f"dissipation factor indefinite (min eig {rmin:.3e})"
            )
        return PhForm(E=E, J=J, R=R, Q=np.eye(rom.order), B=q * rom.Br, orientation=q)
    return None


def _pencil_factors(rom: Rom, tol_structure: float) -> PhForm:
    """Factors from the Hermitian divided differences of the stored data.

    Replacing the stored left values by -w_i^H makes the matrix
    Hermitian and its shifted companion skew-Hermitian; when one sign
    orientation is positive definite, the congruence by the
    conjugate-pair blend yields real factors with E symmetric positive
    definite, J skew, R essentially zero and Q = I.
    """
    data = rom.data
    zs = data.right_points
    k = zs.size
    L, Ls = _mirror_divided_differences(zs, data.right_dirs, data.right_values)

    herm_res = np.linalg.norm(L - L.conj().T) / max(1.0, np.linalg.norm(L))
    skew_res = np.linalg.norm(Ls + Ls.conj().T) / max(1.0, np.linalg.norm(Ls))
    if max(herm_res, skew_res) > 1e-12:
        raise StructureViolation(
            f"zero-data divided differences lost symmetry ({herm_res:.3e}, {skew_res:.3e})"
        )
    L = 0.5 * (L + L.conj().T)
    Ls = 0.5 * (Ls - Ls.conj().T)

    eigs = np.linalg.eigvalsh(L)
    if eigs[0] > 0.0:
        orientation = +1
    elif eigs[-1] < 0.0:
        orientation = -1
    else:
        raise NotDefinite(
            f"Hermitian divided-difference matrix is indefinite "
            f"(eigenvalues in [{eigs[0]:.3e}, {eigs[-1]:.3e}])"
        )
    # orientation=-1 flips the state equation sign so E becomes definite;
    # the transfer C (sE - A)^-1 B is unchanged by the simultaneous flip.
    W = data.right_values
    Ec = orientation * L
    Ac = orientation * Ls
    Bc = orientation * W.conj().T
    Cc = W

    blend = _real_blend(conjugate_blocks(zs), k)
    E = blend.conj().T @ Ec @ blend
    A = blend.conj().T @ Ac @ blend
    B = blend.conj().T @ Bc
    C = Cc @ blend
    for name, M in (("E", E), ("A", A), ("B", B), ("C", C)):
        if np.max(np.abs(M.imag)) > 1e-10 * max(1.0, np.max(np.abs(M))):
            raise StructureViolation(f"real blend left imaginary residue in {name}")
    E, A, B, C = E.real, A.real, B.real, C.real

    scale = max(1.0, float(np.linalg.norm(A)))
    J = 0.5 * (A - A.T)
    R = -0.5 * (A + A.T)
    rmin = float(np.min(np.linalg.eigvalsh(R))) if k else 0.0
    if rmin < -tol_structure * scale:
        raise StructureViolation(f"dissipation factor indefinite (min eig {rmin:.3e})")
    if np.min(np.linalg.eigvalsh(0.5 * (E + E.T))) <= 0.0:
        raise NotDefinite("energy matrix lost definiteness in the real blend")
    E = 0.5 * (E + E.T)
    bres = np.linalg.norm(B - C.T) / max(1.0, np.linalg.norm(B))
    if bres > 1e-10:
        raise StructureViolation(f"port matrices differ from collocated form ({bres:.3e})")

    return PhForm(E=E, J=J, R=R, Q=np.eye(k), B=B, orientation=orientation)


def extract_ph(
    rom: Rom,
    tol_structure: float = 1e-10,
    tol_reproduce: float = 1e-8,
    rng: np.random.Generator | None = None,
) -> PhForm:
    """Explicit energy-form factors of a spectral-zero model.

    Models assembled through the Hermitian divided differences already
    carry the factors in their realization (E definite up to a sign,
    A split into skew and dissipative parts, collocated ports); those
    are read off directly.  Anything else falls back to rebuilding the
    Hermitian pencil from the stored zero data, which requires that
    pencil to be definite in one orientation.  Either way the form's
    transfer is compared with the linear part of the input model at
    random points; a large mismatch means the data and the realization
    do not share a model and the factors would be meaningless.
    """
    if rom.provenance != "spectral_zero":
        raise NotDefinite(
            "energy-form extraction needs a spectral-zero model and its data"
        )

    form = _collocated_factors(rom, tol_structure)
    if form is None:
        form = _pencil_factors(rom, tol_structure)

    if rng is None:
        rng = np.random.default_rng(20260819)
    proper = DescriptorSystem(E=rom.Er, A=rom.Ar, B=rom.Br, C=rom.Cr)
    ph_sys = form.to_descriptor()
    pts = 1j * rng.uniform(0.05, 50.0, size=10)
    for s in pts:
        want = eval_transfer(proper, s)
        got = eval_transfer(ph_sys, s)
        rel = np.linalg.norm(got - want) / max(1e-30, np.linalg.norm(want))
        if rel > tol_reproduce:
            raise StructureViolation(
                f"energy form mismatches the model at s={s:.3f} "
                f"(relative {rel:.3e}); data and realization disagree"
            )
    return form
