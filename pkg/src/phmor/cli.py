"""Configuration-driven pipeline with CSV artifacts.

A single JSON document describes the model, mesh, simulation drive,
reduction band and output directory.  Subcommands run increasing
slices of the same pipeline: validate, assemble, simulate, bode,
reduce, passivate, project, compare, and run (everything).  Exit code
0 on success, 2 when the configuration or model is invalid, 3 when a
numerical stage fails; every artifact directory gets a manifest.json
with content hashes so reruns can be compared byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import artifacts
from .errors import (
    ConfigError,
    GridMismatch,
    NumericalError,
    PhmorError,
    SpecificationError,
)
from .loewner import (
    Rom,
    as_realization,
    bode,
    build_pencil,
    build_projector,
    generate_data,
    real_transform,
    svd_truncate,
)
from .passive import default_shift, passive_reduce, passivity_check
from .pfem import AssembledFom, assemble_fom, build_basis, project_initial
from .phs import SpatialFunction, ValidatedModel, model_from_dict, validate
from .simulate import DescriptorSystem, Feedback, Trajectory, simulate, to_descriptor

__all__ = [
    "RunConfig",
    "load_config",
    "run_pipeline",
    "compare",
    "CompareReport",
    "main",
]


# --- configuration ------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    dt: float
    T: float
    input: list
    x0: dict
    feedback: dict | None
    store_every: int

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass(frozen=True)
class MorConfig:
    freq_band: tuple
    n_points: int
    spacing: str = "log"
    rank_tol: float = 1e-8
    k: int | None = None
    dr_scale: float = 1e-9
    left_eval: str = "zero"
    force_passivate: bool = False


@dataclass(frozen=True)
class OutConfig:
    directory: str
    bode: tuple = (1e-2, 1e3, 400)
    snapshots: tuple = ()


@dataclass(frozen=True)
class RunConfig:
    model: dict
    mesh: dict
    simulation: SimConfig | None
    mor: MorConfig | None
    outputs: OutConfig
    source: Path | None = None


def _parse_simulation(doc: dict | None) -> SimConfig | None:
    if doc is None:
        return None
    try:
        dt = float(doc["dt"])
        T = float(doc["T"])
    except KeyError as exc:
        raise ConfigError(f"simulation section is missing {exc}") from None
    if dt <= 0.0 or T <= 0.0:
        raise ConfigError("simulation needs dt > 0 and T > 0")
    store_every = int(doc.get("store_every", 1))
    if store_every < 1:
        raise ConfigError("store_every must be >= 1")
    inp = doc.get("input", {"kind": "zero"})
    signals = inp if isinstance(inp, list) else [inp]
    for sig in signals:
        if sig.get("kind") not in ("zero", "sine", "step"):
            raise ConfigError(f"unknown input kind {sig.get('kind')!r}")
    return SimConfig(
        dt=dt,
        T=T,
        input=signals,
        x0=doc.get("x0", {"kind": "zero"}),
        feedback=doc.get("feedback"),
        store_every=store_every,
    )


def _parse_mor(doc: dict | None) -> MorConfig | None:
    if doc is None:
        return None
    try:
        lo, hi = (float(v) for v in doc["freq_band"])
        n_points = int(doc["n_points"])
    except KeyError as exc:
        raise ConfigError(f"mor section is missing {exc}") from None
    if not 0.0 < lo < hi:
        raise ConfigError("freq_band must satisfy 0 < lower < upper")
    if n_points < 2:
        raise ConfigError("need at least two interpolation frequencies")
    spacing = doc.get("spacing", "log")
    if spacing not in ("log", "linear"):
        raise ConfigError(f"unknown spacing {spacing!r}")
    k = doc.get("k")
    return MorConfig(
        freq_band=(lo, hi),
        n_points=n_points,
        spacing=spacing,
        rank_tol=float(doc.get("rank_tol", 1e-8)),
        k=int(k) if k is not None else None,
        dr_scale=float(doc.get("dr_scale", 1e-9)),
        left_eval=doc.get("left_eval", "zero"),
        force_passivate=bool(doc.get("force_passivate", False)),
    )


def _parse_outputs(doc: dict | None) -> OutConfig:
    doc = doc or {}
    bode_doc = doc.get("bode", {})
    bode_spec = (
        float(bode_doc.get("lo", 1e-2)),
        float(bode_doc.get("hi", 1e3)),
        int(bode_doc.get("points", 400)),
    )
    if not 0.0 < bode_spec[0] < bode_spec[1] or bode_spec[2] < 2:
        raise ConfigError("bode grid needs 0 < lo < hi and at least 2 points")
    return OutConfig(
        directory=doc.get("directory", "artifacts"),
        bode=bode_spec,
        snapshots=tuple(float(t) for t in doc.get("snapshots", ())),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    with _stage("config"):
        try:
            doc = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if "model" not in doc:
            raise ConfigError("config needs a model section")
        mesh = doc.get("mesh", {})
        if "N1" not in mesh:
            raise ConfigError("mesh section needs N1")
        return RunConfig(
            model=doc["model"],
            mesh=mesh,
            simulation=_parse_simulation(doc.get("simulation")),
            mor=_parse_mor(doc.get("mor")),
            outputs=_parse_outputs(doc.get("outputs")),
            source=path,
        )


@contextmanager
def _stage(name: str):
    """Tag module errors with the pipeline stage that raised them."""
    try:
        yield
    except PhmorError as exc:
        exc.args = (f"[{name}] {exc.args[0] if exc.args else exc}",)
        raise


# --- drive construction -------------------------------------------------

def _input_fn(signals: list, m: int):
    active = [s for s in signals if s.get("kind") != "zero"]
    if not active:
        return None
    parsed = []
    for sig in active:
        ch = int(sig.get("channel", 1))
        if not 1 <= ch <= m:
            raise ConfigError(f"input channel {ch} outside 1..{m}")
        ramp = float(sig.get("ramp", 0.0))
        if ramp < 0.0:
            raise ConfigError("input ramp must be nonnegative")
        parsed.append((
            sig["kind"],
            float(sig.get("amplitude", 1.0)),
            float(sig.get("omega", 1.0)),
            float(sig.get("t_end", np.inf)),
            ramp,
            ch - 1,
        ))

    def u(t: float) -> np.ndarray:
        out = np.zeros(m)
        for kind, amp, omega, t_end, ramp, ch in parsed:
            if t > t_end:
                continue
            v = amp * np.sin(omega * t) if kind == "sine" else amp
            if t < ramp:
                # smooth turn-on keeps the drive band-limited
                v *= np.sin(0.5 * np.pi * t / ramp) ** 2
            out[ch] += v
        return out

    return u


def _feedback(doc: dict | None, m: int) -> Feedback | None:
    if doc is None:
        return None
    kdoc = doc.get("K", 0.0)
    if isinstance(kdoc, dict) and "diag" in kdoc:
        K = np.diag(np.asarray(kdoc["diag"], dtype=float))
    elif isinstance(kdoc, (int, float)):
        K = float(kdoc) * np.eye(m)
    else:
        K = np.asarray(kdoc, dtype=float)
    if K.shape != (m, m):
        raise ConfigError(f"feedback gain must be {m}x{m}, got {K.shape}")
    r = doc.get("r")
    r = None if r is None else np.asarray(r, dtype=float)
    if r is not None and r.shape != (m,):
        raise ConfigError(f"feedback reference must have length {m}")
    return Feedback(K=K, r=r)


def _x0_vector(doc: dict, fom: AssembledFom) -> np.ndarray | None:
    kind = doc.get("kind", "zero")
    if kind == "zero":
        return None
    if kind != "sine":
        raise ConfigError(f"unknown x0 kind {kind!r}")
    model = fom.model
    n = model.n
    a, b = model.interval
    group = int(doc.get("group", 1))
    fidx = int(doc.get("field", 1))
    wav = int(doc.get("k", 1))
    amp = float(doc.get("amplitude", 1.0))
    sizes = (model.n1, model.n2)
    if group not in (1, 2) or not 1 <= fidx <= sizes[group - 1]:
        raise ConfigError(f"x0 field ({group},{fidx}) out of range")
    row = (0 if group == 1 else model.n1) + fidx - 1

    def profile(z, _row=row, _amp=amp, _k=wav):
        out = np.zeros((n, 1))
        out[_row, 0] = _amp * np.sin(_k * np.pi * (z - a) / (b - a))
        return out

    x0 = SpatialFunction(shape=(n, 1), fn=profile)
    return project_initial(fom, x0).vector


# --- pipeline -----------------------------------------------------------

@dataclass
class PipelineResult:
    model: ValidatedModel | None = None
    fom: AssembledFom | None = None
    fom_sys: DescriptorSystem | None = None
    fom_traj: Trajectory | None = None
    data: object = None
    prelim: Rom | None = None
    prelim_cert: object = None
    final: Rom | None = None
    final_cert: object = None
    rom_traj: Trajectory | None = None
    rom_energy: np.ndarray | None = None
    report: "CompareReport | None" = None
    notes: dict = field(default_factory=dict)


def _interp_freqs(mor: MorConfig) -> np.ndarray:
    lo, hi = mor.freq_band
    if mor.spacing == "linear":
        return np.linspace(lo, hi, mor.n_points)
    return np.geomspace(lo, hi, mor.n_points)


def _reduce(fom_sys: DescriptorSystem, mor: MorConfig):
    data = generate_data(fom_sys, _interp_freqs(mor))
    rr = real_transform(as_realization(build_pencil(data)))
    rom, X, _ = svd_truncate(rr, tol_rank=mor.rank_tol, k=mor.k)
    T = build_projector(fom_sys, data, X)
    return rom.with_projector(T), data


def _simulate_once(sys, sim: SimConfig, feedback, u, x0, storage):
    return simulate(
        sys,
        dt=sim.dt,
        n_steps=sim.n_steps,
        u=u,
        x0=x0,
        feedback=feedback,
        store_every=sim.store_every,
        storage=storage,
    )


def _lifted_energy(fom: AssembledFom, T: np.ndarray, states: np.ndarray) -> np.ndarray:
    lifted = states @ T.T
    return 0.5 * np.einsum("ij,ij->i", lifted @ fom.Q, lifted)


def _rom_storage(rom: Rom) -> np.ndarray | None:
    """Storage matrix for the reduced model's own energy trace.

    Spectral-zero models carry a definite symmetric part of Er in one
    of the two sign conventions; anything else has no intrinsic
    quadratic storage worth tracking.
    """
    if rom.provenance != "spectral_zero":
        return None
    Es = 0.5 * (rom.Er + rom.Er.T)
    lam = np.linalg.eigvalsh(Es)
    if lam[0] > 0.0:
        return Es
    if lam[-1] < 0.0:
        return -Es
    return None


@dataclass(frozen=True)
class CompareReport:
    """Per-time discrepancies between a full and a reduced trajectory."""

    times: np.ndarray
    output_error: np.ndarray
    state_error: np.ndarray | None
    output_scale: float
    state_scale: float | None

    @property
    def max_output_error(self) -> float:
        return float(np.max(self.output_error))

    @property
    def max_state_error(self) -> float | None:
        return None if self.state_error is None else float(np.max(self.state_error))


def compare(
    fom_traj: Trajectory,
    rom_traj: Trajectory,
    T: np.ndarray | None = None,
    weight: np.ndarray | None = None,
) -> CompareReport:
    """Output error per step, plus lifted-state error when T is given.

    The state error is measured in the weight-induced norm (the mass
    matrix of the full model is the natural choice).  Time grids must
    coincide.
    """
    ta, tb = fom_traj.times, rom_traj.times
    if ta.size != tb.size or np.max(np.abs(ta - tb)) > 1e-12 * max(1.0, ta[-1]):
        raise GridMismatch("trajectories live on different time grids")
    out_err = np.linalg.norm(fom_traj.outputs - rom_traj.outputs, axis=1)
    out_scale = float(np.max(np.linalg.norm(fom_traj.outputs, axis=1)))
    state_err = None
    state_scale = None
    if T is not None:
        W = weight if weight is not None else np.eye(fom_traj.states.shape[1])
        diff = fom_traj.states - rom_traj.states @ T.T
        state_err = np.sqrt(np.einsum("ij,ij->i", diff @ W, diff))
        state_scale = float(
            np.max(np.sqrt(np.einsum("ij,ij->i", fom_traj.states @ W, fom_traj.states)))
        )
    return CompareReport(
        times=ta.copy(),
        output_error=out_err,
        state_error=state_err,
        output_scale=out_scale,
        state_scale=state_scale,
    )


def run_pipeline(
    cfg: RunConfig,
    need_sim: bool = True,
    need_mor: bool = True,
) -> PipelineResult:
    """Validate, assemble, simulate, reduce, certify, and compare."""
    res = PipelineResult()
    with _stage("validate"):
        res.model = validate(model_from_dict(cfg.model))
    with _stage("assemble"):
        b1, b2 = build_basis(
            res.model, int(cfg.mesh["N1"]), cfg.mesh.get("N2")
        )
        res.fom = assemble_fom(res.model, b1, b2)
        res.fom_sys = to_descriptor(res.fom)
    m = res.fom_sys.n_ports

    sim = cfg.simulation
    u = fb = x0 = None
    if need_sim:
        if sim is None:
            raise ConfigError("this command needs a simulation section")
        with _stage("simulate"):
            u = _input_fn(sim.input, m)
            fb = _feedback(sim.feedback, m)
            x0 = _x0_vector(sim.x0, res.fom)
            res.fom_traj = _simulate_once(res.fom_sys, sim, fb, u, x0, res.fom.Q)

    if not need_mor:
        return res
    if cfg.mor is None:
        raise ConfigError("this command needs a mor section")
    with _stage("reduce"):
        res.prelim, res.data = _reduce(res.fom_sys, cfg.mor)
    with _stage("certify"):
        res.prelim_cert = passivity_check(res.prelim.to_descriptor())
    res.notes["prelim_verdict"] = res.prelim_cert.verdict
    if res.prelim_cert.verdict != "passive" or cfg.mor.force_passivate:
        with _stage("passivate"):
            Dr = default_shift(m, cfg.mor.dr_scale)
            res.final = passive_reduce(
                res.prelim,
                Dr=Dr,
                fom_context=res.fom_sys,
                left_eval=cfg.mor.left_eval,
            )
            res.final_cert = res.final.extras["certificate"]
    else:
        res.final = res.prelim
        res.final_cert = res.prelim_cert
    res.notes["final_verdict"] = res.final_cert.verdict
    res.notes["final_provenance"] = res.final.provenance

    if need_sim and sim is not None:
        with _stage("simulate_rom"):
            res.rom_traj = _simulate_once(
                res.final.to_descriptor(), sim, fb, u, None, _rom_storage(res.final)
            )
            if res.final.T is not None:
                res.rom_energy = _lifted_energy(
                    res.fom, res.final.T, res.rom_traj.states
                )
        with _stage("compare"):
            res.report = compare(
                res.fom_traj, res.rom_traj, T=res.final.T, weight=res.fom.E
            )
    return res


# --- artifact emission --------------------------------------------------

def _outdir(cfg: RunConfig, override: str | None) -> Path:
    d = Path(override) if override else Path(cfg.outputs.directory)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_fom_matrices(out: Path, fom: AssembledFom) -> list:
    names = {"E": fom.E, "J": fom.J, "R": fom.R, "Q": fom.Q, "B": fom.B}
    return [
        artifacts.write_matrix_csv(out / f"fom_{k}.csv", v) for k, v in names.items()
    ]


def _write_rom_matrices(out: Path, rom: Rom, tag: str) -> list:
    files = [
        artifacts.write_matrix_csv(out / f"rom_{tag}_E.csv", rom.Er),
        artifacts.write_matrix_csv(out / f"rom_{tag}_A.csv", rom.Ar),
        artifacts.write_matrix_csv(out / f"rom_{tag}_B.csv", rom.Br),
        artifacts.write_matrix_csv(out / f"rom_{tag}_C.csv", rom.Cr),
    ]
    if rom.D is not None:
        files.append(artifacts.write_matrix_csv(out / f"rom_{tag}_D.csv", rom.D))
    if rom.T is not None:
        files.append(artifacts.write_matrix_csv(out / f"projector_{tag}.csv", rom.T))
    return files


def _write_snapshots(out: Path, cfg: RunConfig, res: PipelineResult) -> list:
    files = []
    traj = res.fom_traj
    fom = res.fom
    model = fom.model
    for k, t_req in enumerate(cfg.outputs.snapshots):
        idx = int(np.argmin(np.abs(traj.times - t_req)))
        t = float(traj.times[idx])
        state = traj.states[idx]
        split = model.n1 * fom.basis1.size
        parts = (
            (state[:split].reshape(model.n1, -1), fom.basis1, 1),
            (state[split:].reshape(model.n2, -1), fom.basis2, 2),
        )
        for coeffs, basis, gid in parts:
            files.append(
                artifacts.write_snapshot_csv(
                    out / f"snapshot_{k:02d}_group{gid}.csv",
                    t,
                    basis.nodes,
                    coeffs.T,
                )
            )
    return files


def _bode_grid(cfg: RunConfig) -> np.ndarray:
    lo, hi, points = cfg.outputs.bode
    return np.logspace(np.log10(lo), np.log10(hi), points)


def _manifest(out: Path, cfg: RunConfig, files: list, extra: dict) -> Path:
    info = dict(extra)
    if cfg.source is not None and cfg.source.exists():
        info["config_sha256"] = artifacts.sha256_of(cfg.source)
    return artifacts.write_manifest(out, files, info)


# --- subcommands --------------------------------------------------------

def cmd_validate(cfg: RunConfig, out: str | None) -> int:
    with _stage("validate"):
        model = validate(model_from_dict(cfg.model))
    kind = "lossless interior" if model.iep_flag else "dissipative interior"
    print(
        f"model ok: {model.n1}+{model.n2} fields on "
        f"[{model.interval[0]:g}, {model.interval[1]:g}], {kind}, "
        f"{model.spec.VB.shape[0]} boundary ports"
    )
    return 0


def cmd_assemble(cfg: RunConfig, out: str | None) -> int:
    res = run_pipeline(cfg, need_sim=False, need_mor=False)
    outdir = _outdir(cfg, out)
    files = _write_fom_matrices(outdir, res.fom)
    _manifest(outdir, cfg, files, {"order": res.fom.size})
    print(f"assembled order {res.fom.size} into {outdir}")
    return 0


def cmd_simulate(cfg: RunConfig, out: str | None) -> int:
    res = run_pipeline(cfg, need_sim=True, need_mor=False)
    outdir = _outdir(cfg, out)
    files = [artifacts.write_trajectory_csv(outdir / "trajectory_fom.csv", res.fom_traj)]
    files += _write_snapshots(outdir, cfg, res)
    _manifest(outdir, cfg, files, {"steps": cfg.simulation.n_steps})
    print(f"simulated {cfg.simulation.n_steps} steps into {outdir}")
    return 0


def cmd_bode(cfg: RunConfig, out: str | None) -> int:
    res = run_pipeline(cfg, need_sim=False, need_mor=False)
    outdir = _outdir(cfg, out)
    grid = _bode_grid(cfg)
    with _stage("bode"):
        resp = bode(res.fom_sys, grid)
    files = [artifacts.write_bode_csv(outdir / "bode_fom.csv", grid, resp)]
    _manifest(outdir, cfg, files, {"points": grid.size})
    print(f"sampled {grid.size} frequencies into {outdir}")
    return 0


def cmd_reduce(cfg: RunConfig, out: str | None) -> int:
    res = run_pipeline(cfg, need_sim=False, need_mor=False)
    if cfg.mor is None:
        raise ConfigError("reduce needs a mor section")
    with _stage("reduce"):
        rom, data = _reduce(res.fom_sys, cfg.mor)
    outdir = _outdir(cfg, out)
    files = [artifacts.write_data_csv(outdir / "data.csv", data)]
    files += _write_rom_matrices(outdir, rom, "prelim")
    grid = _bode_grid(cfg)
    with _stage("bode"):
        files.append(
            artifacts.write_bode_csv(
                outdir / "bode_prelim.csv", grid, bode(rom.to_descriptor(), grid)
            )
        )
    extra = {
        "order": rom.order,
        "max_fit_residual": float(np.max(rom.fit_residuals)),
    }
    _manifest(outdir, cfg, files, extra)
    print(f"reduced to order {rom.order} into {outdir}")
    return 0


def cmd_passivate(cfg: RunConfig, out: str | None) -> int:
    res = run_pipeline(cfg, need_sim=False, need_mor=True)
    outdir = _outdir(cfg, out)
    files = [artifacts.write_data_csv(outdir / "data.csv", res.data)]
    files += _write_rom_matrices(outdir, res.prelim, "prelim")
    files.append(
        artifacts.write_certificate_csv(outdir / "certificate_prelim.csv", res.prelim_cert)
    )
    extra = dict(res.notes)
    extra["prelim_order"] = res.prelim.order
    if res.final is not res.prelim:
        files += _write_rom_matrices(outdir, res.final, "final")
        files.append(
            artifacts.write_zeros_csv(outdir / "zeros.csv", res.final.extras["zeros"])
        )
        files.append(
            artifacts.write_certificate_csv(
                outdir / "certificate_final.csv", res.final_cert
            )
        )
        extra["final_order"] = res.final.order
        extra["min_popov"] = float(np.nanmin(res.final_cert.min_popov_eig))
        extra["spectral_abscissa"] = res.final_cert.spectral_abscissa
    _manifest(outdir, cfg, files, extra)
    print(
        f"preliminary verdict {res.prelim_cert.verdict}; "
        f"final verdict {res.final_cert.verdict} into {outdir}"
    )
    return 0


def cmd_project(cfg: RunConfig, out: str | None) -> int:
    res = run_pipeline(cfg, need_sim=False, need_mor=True)
    outdir = _outdir(cfg, out)
    files = [artifacts.write_matrix_csv(outdir / "projector_final.csv", res.final.T)]
    _manifest(outdir, cfg, files, {"order": res.final.order})
    print(f"projector {res.final.T.shape[0]}x{res.final.T.shape[1]} into {outdir}")
    return 0


def cmd_compare(cfg: RunConfig, out: str | None) -> int:
    res = run_pipeline(cfg)
    outdir = _outdir(cfg, out)
    rep = res.report
    files = [
        artifacts.write_compare_csv(
            outdir / "compare.csv", rep.times, rep.output_error, rep.state_error
        )
    ]
    extra = {
        "max_output_error": rep.max_output_error,
        "output_scale": rep.output_scale,
    }
    if rep.state_error is not None:
        extra["max_lifted_state_error"] = rep.max_state_error
        extra["state_scale"] = rep.state_scale
    _manifest(outdir, cfg, files, extra)
    print(
        f"max output error {rep.max_output_error:.3e} "
        f"(scale {rep.output_scale:.3e}) into {outdir}"
    )
    return 0


def cmd_run(cfg: RunConfig, out: str | None) -> int:
    res = run_pipeline(cfg)
    outdir = _outdir(cfg, out)
    files = _write_fom_matrices(outdir, res.fom)
    files.append(artifacts.write_trajectory_csv(outdir / "trajectory_fom.csv", res.fom_traj))
    files += _write_snapshots(outdir, cfg, res)
    grid = _bode_grid(cfg)
    with _stage("bode"):
        files.append(
            artifacts.write_bode_csv(outdir / "bode_fom.csv", grid, bode(res.fom_sys, grid))
        )
        files.append(
            artifacts.write_bode_csv(
                outdir / "bode_prelim.csv", grid, bode(res.prelim.to_descriptor(), grid)
            )
        )
        files.append(
            artifacts.write_bode_csv(
                outdir / "bode_final.csv", grid, bode(res.final.to_descriptor(), grid)
            )
        )
    files.append(artifacts.write_data_csv(outdir / "data.csv", res.data))
    files += _write_rom_matrices(outdir, res.prelim, "prelim")
    files.append(
        artifacts.write_certificate_csv(outdir / "certificate_prelim.csv", res.prelim_cert)
    )
    if res.final is not res.prelim:
        files += _write_rom_matrices(outdir, res.final, "final")
        files.append(
            artifacts.write_zeros_csv(outdir / "zeros.csv", res.final.extras["zeros"])
        )
        files.append(
            artifacts.write_certificate_csv(
                outdir / "certificate_final.csv", res.final_cert
            )
        )
    files.append(
        artifacts.write_trajectory_csv(outdir / "trajectory_rom.csv", res.rom_traj)
    )
    if res.rom_energy is not None:
        files.append(
            artifacts.write_energy_csv(
                outdir / "energy_lifted.csv", res.rom_traj.times, res.rom_energy
            )
        )
    rep = res.report
    files.append(
        artifacts.write_compare_csv(
            outdir / "compare.csv", rep.times, rep.output_error, rep.state_error
        )
    )
    extra = dict(res.notes)
    extra.update(
        {
            "fom_order": res.fom.size,
            "prelim_order": res.prelim.order,
            "final_order": res.final.order,
            "max_output_error": rep.max_output_error,
            "output_scale": rep.output_scale,
        }
    )
    if rep.state_error is not None:
        extra["max_lifted_state_error"] = rep.max_state_error
        extra["state_scale"] = rep.state_scale
    _manifest(outdir, cfg, files, extra)
    print(
        f"pipeline done: order {res.fom.size} -> {res.final.order} "
        f"({res.notes['final_verdict']}), artifacts in {outdir}"
    )
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "assemble": cmd_assemble,
    "simulate": cmd_simulate,
    "bode": cmd_bode,
    "reduce": cmd_reduce,
    "passivate": cmd_passivate,
    "project": cmd_project,
    "compare": cmd_compare,
    "run": cmd_run,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="phmor",
        description="structure-preserving discretization and reduction pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=None, help="artifact directory override")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args.out)
    except SpecificationError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        for v in getattr(exc, "violations", ()) or ():
            print(f"  - {v}", file=_sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=_sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
