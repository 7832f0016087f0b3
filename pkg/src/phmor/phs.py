"""Boundary-controlled port-Hamiltonian systems on a 1D interval.

A model consists of two field groups of sizes n1 and n2 (n = n1 + n2)
coupled through

    dx/dt = P d(e)/dz - G e,      e(z, t) = H(z) x(z, t),

on z in [a, b], with P symmetric invertible, G + G^T positive
semidefinite, H(z) = blockdiag(H1(z), H2(z)) symmetric positive
definite, and boundary input/output

    u(t) = VB (e(b); e(a)),       y(t) = VC (e(b); e(a)).

Both boundary matrices must be full rank and isotropic with respect to
diag(P^-1, -P^-1); for such a pair the product VC^T VB differs from
(1/2) diag(P, -P) by a skew-symmetric matrix, which `validate` checks
and returns.  The stored energy (1/2) integral of x^T H x then obeys
dH/dt <= u^T y, with equality exactly when G + G^T = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    BoundaryConditionViolation,
    DefinitenessViolation,
    NonPositiveCoefficient,
    RankDeficient,
    ShapeMismatch,
    SpecificationError,
    SymmetryViolation,
    UnknownPreset,
)
from .quadrature import composite_integral

__all__ = [
    "SpatialFunction",
    "BcPhsSpec",
    "Tolerances",
    "ValidatedModel",
    "validate",
    "preset",
    "hamiltonian_density",
    "model_from_dict",
    "boundary_form",
]


@dataclass(frozen=True)
class SpatialFunction:
    """Matrix-valued function of the spatial coordinate.

    `fn` maps a float z to an array of shape `shape`; constant
    coefficients use the `constant` constructor.
    """

    shape: tuple
    fn: Callable[[float], np.ndarray]

    def __call__(self, z: float) -> np.ndarray:
        val = np.asarray(self.fn(z), dtype=float)
        if val.shape != self.shape:
            raise ShapeMismatch(
                f"spatial function returned shape {val.shape}, expected {self.shape}"
            )
        return val

    @staticmethod
    def constant(value) -> "SpatialFunction":
        arr = np.atleast_2d(np.asarray(value, dtype=float))
        return SpatialFunction(arr.shape, lambda z, _a=arr: _a)


@dataclass(frozen=True)
class BcPhsSpec:
    """Raw model data, not yet checked."""

    n1: int
    n2: int
    interval: tuple
    P: np.ndarray
    G: np.ndarray
    H1: SpatialFunction
    H2: SpatialFunction
    VB: np.ndarray
    VC: np.ndarray

    @property
    def n(self) -> int:
        return self.n1 + self.n2


@dataclass(frozen=True)
class Tolerances:
    """Validation tolerances.

    boundary: absolute Frobenius bound on the isotropy and pairing
        residuals of VB/VC.
    psd_rel: relative bound, scaled by ||G||_F, below which the
        symmetric part of G counts as zero / nonnegative.
    cond_max: largest admissible condition number of P.
    sample_points: number of Chebyshev points at which H1, H2 are
        checked for symmetric positive definiteness.
    """

    boundary: float = 1e-10
    psd_rel: float = 1e-10
    sym_rel: float = 1e-12
    cond_max: float = 1e12
    sample_points: int = 32


@dataclass(frozen=True)
class ValidatedModel:
    """A model spec that passed all structural checks.

    Jxi is the skew-symmetric matrix with
    VC^T VB = (1/2) diag(P, -P) - Jxi; iep_flag marks models whose
    interior is lossless (G + G^T = 0), for which the energy balance
    holds with equality.
    """

    spec: BcPhsSpec
    iep_flag: bool
    Jxi: np.ndarray
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def n1(self) -> int:
        return self.spec.n1

    @property
    def n2(self) -> int:
        return self.spec.n2

    @property
    def interval(self) -> tuple:
        return self.spec.interval


def boundary_form(P: np.ndarray) -> np.ndarray:
    """The quadratic form diag(P^-1, -P^-1) on boundary traces."""
    Pinv = np.linalg.inv(P)
    n = P.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = Pinv
    out[n:, n:] = -Pinv
    return out


def _chebyshev_points(a: float, b: float, m: int) -> np.ndarray:
    # Chebyshev-Lobatto points, endpoints included.
    k = np.arange(m)
    return a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * k / (m - 1)))


def _check_spd_samples(H: SpatialFunction, pts, label: str, tol: Tolerances, violations):
    for z in pts:
        val = H(z)
        scale = max(1.0, float(np.linalg.norm(val)))
        if np.linalg.norm(val - val.T) > tol.sym_rel * scale:
            violations.append(
                SymmetryViolation(f"{label}({z:.6g}) is not symmetric")
            )
            return
        lam = np.linalg.eigvalsh(0.5 * (val + val.T))
        if lam[0] <= 0.0:
            violations.append(
                DefinitenessViolation(
                    f"{label}({z:.6g}) is not positive definite (min eig {lam[0]:.3e})"
                )
            )
            return


def validate(spec: BcPhsSpec, tolerances: Tolerances | None = None) -> ValidatedModel:
    """Check all structural requirements and derive the pairing matrix.

    Raises the first violation found, with the full list attached as
    the `violations` attribute.  Checks: shape consistency, symmetry
    and conditioning of P, positive semidefiniteness of G + G^T,
    pointwise symmetric positive definiteness of H1 and H2 at Chebyshev
    sample points, full rank of VB and VC, isotropy of both with
    respect to diag(P^-1, -P^-1), and skew-symmetry of
    Jxi = (1/2) diag(P, -P) - VC^T VB.
    """
    tol = tolerances or Tolerances()
    n1, n2 = spec.n1, spec.n2
    if n1 < 1 or n2 < 1:
        raise ShapeMismatch(f"field group sizes must be positive, got ({n1}, {n2})")
    n = n1 + n2
    a, b = float(spec.interval[0]), float(spec.interval[1])
    if not a < b:
        raise ShapeMismatch(f"interval must satisfy a < b, got ({a}, {b})")

    P = np.asarray(spec.P, dtype=float)
    G = np.asarray(spec.G, dtype=float)
    VB = np.asarray(spec.VB, dtype=float)
    VC = np.asarray(spec.VC, dtype=float)
    for name, arr, shape in (
        ("P", P, (n, n)),
        ("G", G, (n, n)),
        ("VB", VB, (n, 2 * n)),
        ("VC", VC, (n, 2 * n)),
    ):
        if arr.shape != shape:
            raise ShapeMismatch(f"{name} has shape {arr.shape}, expected {shape}")
    if spec.H1.shape != (n1, n1):
        raise ShapeMismatch(f"H1 has shape {spec.H1.shape}, expected {(n1, n1)}")
    if spec.H2.shape != (n2, n2):
        raise ShapeMismatch(f"H2 has shape {spec.H2.shape}, expected {(n2, n2)}")

    violations: list[SpecificationError] = []

    p_scale = max(1.0, float(np.linalg.norm(P)))
    if np.linalg.norm(P - P.T) > tol.sym_rel * p_scale:
        violations.append(SymmetryViolation("P is not symmetric"))
    sv = np.linalg.svd(P, compute_uv=False)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > tol.cond_max:
        violations.append(
            RankDeficient(f"P is singular or ill conditioned (cond ~ {sv[0] / max(sv[-1], 1e-300):.3e})")
        )

    g_norm = float(np.linalg.norm(G))
    tol_psd = tol.psd_rel * g_norm
    sym_g = G + G.T
    lam_g = np.linalg.eigvalsh(0.5 * (sym_g + sym_g.T))
    if lam_g[0] < -tol_psd:
        violations.append(
            DefinitenessViolation(
                f"G + G^T has negative eigenvalue {lam_g[0]:.3e} (tol {tol_psd:.3e})"
            )
        )
    iep_flag = bool(np.linalg.norm(sym_g) <= tol_psd)

    pts = _chebyshev_points(a, b, tol.sample_points)
    _check_spd_samples(spec.H1, pts, "H1", tol, violations)
    _check_spd_samples(spec.H2, pts, "H2", tol, violations)

    for name, V in (("VB", VB), ("VC", VC)):
        sv_v = np.linalg.svd(V, compute_uv=False)
        if sv_v[-1] <= 1e-12 * sv_v[0]:
            violations.append(RankDeficient(f"{name} is rank deficient"))

    # Isotropy of each boundary matrix w.r.t. diag(P^-1, -P^-1); only
    # meaningful when P is usable.
    if not any(isinstance(v, RankDeficient) and "P is" in str(v) for v in violations):
        sigma_p = boundary_form(P)
        for name, V in (("VB", VB), ("VC", VC)):
            res = float(np.linalg.norm(V @ sigma_p @ V.T))
            if res > tol.boundary:
                violations.append(
                    BoundaryConditionViolation(
                        f"{name} diag(P^-1,-P^-1) {name}^T = 0 fails (residual {res:.3e})"
                    )
                )

    half_pp = np.zeros((2 * n, 2 * n))
    half_pp[:n, :n] = 0.5 * P
    half_pp[n:, n:] = -0.5 * P
    Jxi = half_pp - VC.T @ VB
    skew_res = float(np.linalg.norm(Jxi + Jxi.T))
    if skew_res > tol.boundary:
        violations.append(
            BoundaryConditionViolation(
                f"VC^T VB - (1/2) diag(P,-P) is not skew (residual {skew_res:.3e}); "
                "VB and VC are not a conjugated input/output pair"
            )
        )

    if violations:
        err = violations[0]
        err.violations = violations
        raise err

    return ValidatedModel(
        spec=BcPhsSpec(n1, n2, (a, b), P, G, spec.H1, spec.H2, VB, VC),
        iep_flag=iep_flag,
        Jxi=Jxi,
        tolerances=tol,
    )


def hamiltonian_density(
    model: ValidatedModel | BcPhsSpec,
    x: SpatialFunction,
    panels: int = 256,
    points: int = 4,
) -> float:
    """Stored energy (1/2) integral of x^T H x over the interval."""
    spec = model.spec if isinstance(model, ValidatedModel) else model
    n1, n = spec.n1, spec.n
    if x.shape != (n, 1):
        raise ShapeMismatch(f"state function has shape {x.shape}, expected {(n, 1)}")
    a, b = spec.interval

    def integrand(z):
        xv = x(z)
        x1, x2 = xv[:n1], xv[n1:]
        return (x1.T @ spec.H1(z) @ x1 + x2.T @ spec.H2(z) @ x2).item()

    return 0.5 * float(composite_integral(integrand, a, b, panels=panels, points=points))


# --- presets -----------------------------------------------------------

def _require_positive(label: str, value: float):
    if not value > 0.0:
        raise NonPositiveCoefficient(f"{label} must be positive, got {value}")


def _wave_spec(T0, rho0, a, b, VB, VC) -> BcPhsSpec:
    _require_positive("T0", T0)
    _require_positive("rho0", rho0)
    return BcPhsSpec(
        n1=1,
        n2=1,
        interval=(a, b),
        P=np.array([[0.0, 1.0], [1.0, 0.0]]),
        G=np.zeros((2, 2)),
        H1=SpatialFunction.constant([[float(T0)]]),
        H2=SpatialFunction.constant([[1.0 / float(rho0)]]),
        VB=VB,
        VC=VC,
    )


def _preset_wave_neumann(T0=1.0, rho0=1.0, a=0.0, b=1.0) -> BcPhsSpec:
    # Inputs: velocity at the left end, force at the right end.
    VB = np.array(
        [
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]
    )
    VC = np.array(
        [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 1.0, 0.0, 0.0],
        ]
    )
    return _wave_spec(T0, rho0, a, b, VB, VC)


def _preset_wave_mixed(T0=1.0, rho0=1.0, a=0.0, b=1.0) -> BcPhsSpec:
    # Inputs: velocity at the left end, force at the right end
    # (the variant used for the string clamped on the left).
    VB = np.array(
        [
            [0.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0],
        ]
    )
    VC = np.array(
        [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]
    )
    return _wave_spec(T0, rho0, a, b, VB, VC)


def _preset_timoshenko(
    K=1.0, EI=1.0, rho=1.0, I_rho=1.0, g1=0.0, g2=0.0, a=0.0, b=1.0
) -> BcPhsSpec:
    """Clamped-left beam with shear/bending states and two dissipation knobs."""
    for label, val in (("K", K), ("EI", EI), ("rho", rho), ("I_rho", I_rho)):
        _require_positive(label, float(val))
    for label, val in (("g1", g1), ("g2", g2)):
        if float(val) < 0.0:
            raise NonPositiveCoefficient(f"{label} must be nonnegative, got {val}")

    I2 = np.eye(2)
    P = np.zeros((4, 4))
    P[:2, 2:] = I2
    P[2:, :2] = I2

    G12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    G = np.zeros((4, 4))
    G[:2, 2:] = G12
    G[2:, :2] = -G12.T
    G[2:, 2:] = np.diag([float(g1), float(g2)])

    H1 = SpatialFunction.constant(np.diag([float(K), float(EI)]))
    H2 = SpatialFunction.constant(np.diag([1.0 / float(rho), 1.0 / float(I_rho)]))

    # Inputs: velocities at the left end, force/torque at the right end;
    # outputs are the conjugate boundary traces.
    VB = np.zeros((4, 8))
    VB[0, 6] = 1.0
    VB[1, 7] = 1.0
    VB[2, 0] = 1.0
    VB[3, 1] = 1.0
    VC = np.zeros((4, 8))
    VC[0, 4] = -1.0
    VC[1, 5] = -1.0
    VC[2, 2] = 1.0
    VC[3, 3] = 1.0
    return BcPhsSpec(
        n1=2, n2=2, interval=(float(a), float(b)), P=P, G=G, H1=H1, H2=H2, VB=VB, VC=VC
    )


_PRESETS = {
    "wave_neumann": _preset_wave_neumann,
    "wave_mixed": _preset_wave_mixed,
    "timoshenko": _preset_timoshenko,
}


def preset(name: str, **params) -> BcPhsSpec:
    """Construct one of the bundled example models."""
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(
            f"unknown preset {name!r}; available: {sorted(_PRESETS)}"
        ) from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise SpecificationError(f"bad parameters for preset {name!r}: {exc}") from None


# --- JSON loading -------------------------------------------------------

def _coefficient_from_json(entry, label: str) -> SpatialFunction:
    """A coefficient is a constant matrix or a named spatial profile."""
    if isinstance(entry, (int, float)):
        return SpatialFunction.constant([[float(entry)]])
    if isinstance(entry, list):
        return SpatialFunction.constant(entry)
    if isinstance(entry, dict):
        kind = entry.get("kind")
        if kind == "constant":
            return SpatialFunction.constant(entry["value"])
        if kind == "affine":
            c0 = np.atleast_2d(np.asarray(entry["c0"], dtype=float))
            c1 = np.atleast_2d(np.asarray(entry["c1"], dtype=float))
            if c0.shape != c1.shape:
                raise ShapeMismatch(f"{label}: c0 and c1 shapes differ")
            return SpatialFunction(c0.shape, lambda z, a=c0, b=c1: a + z * b)
        raise UnknownPreset(f"{label}: unknown coefficient kind {kind!r}")
    raise ShapeMismatch(f"{label}: cannot interpret coefficient entry {entry!r}")


def model_from_dict(doc: dict) -> BcPhsSpec:
    """Build a model spec from a JSON document.

    Either {"preset": name, "params": {...}} or an explicit spec with
    keys n1, n2, interval, P, G, VB, VC, H1, H2 (dense row-major
    arrays; H1/H2 may also be named coefficient functions).
    """
    if "preset" in doc:
        return preset(doc["preset"], **doc.get("params", {}))
    try:
        n1 = int(doc["n1"])
        n2 = int(doc["n2"])
        interval = tuple(float(v) for v in doc["interval"])
        P = np.asarray(doc["P"], dtype=float)
        G = np.asarray(doc["G"], dtype=float)
        VB = np.asarray(doc["VB"], dtype=float)
        VC = np.asarray(doc["VC"], dtype=float)
    except KeyError as exc:
        raise ShapeMismatch(f"model document is missing key {exc}") from None
    H1 = _coefficient_from_json(doc["H1"], "H1")
    H2 = _coefficient_from_json(doc["H2"], "H2")
    return BcPhsSpec(n1=n1, n2=n2, interval=interval, P=P, G=G, H1=H1, H2=H2, VB=VB, VC=VC)
