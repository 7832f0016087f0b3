"""Deterministic CSV and manifest writers.

Every number is rendered with 17 significant digits and LF line
endings so that re-running an identical configuration reproduces
byte-identical files.  Matrices use coordinate triplets (exact zeros
skipped), trajectories one row per stored step, frequency responses
one row per grid point with magnitude/phase per channel pair.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, ShapeMismatch
from .loewner import TangentialData
from .passive import PassivityCertificate, SpectralZeroSet
from .simulate import Trajectory

__all__ = [
    "format_number",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_trajectory_csv",
    "write_snapshot_csv",
    "write_bode_csv",
    "write_data_csv",
    "read_data_csv",
    "write_zeros_csv",
    "write_certificate_csv",
    "write_energy_csv",
    "write_compare_csv",
    "write_manifest",
    "sha256_of",
]

_FMT = "%.17g"


def format_number(x: float) -> str:
    # adding 0.0 folds negative zero into plain zero
    return _FMT % (float(x) + 0.0)


def _write_lines(path, header: str, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return path


def write_matrix_csv(path, M: np.ndarray) -> Path:
    """Coordinate-form matrix export: row,col,value with zeros skipped."""
    M = np.atleast_2d(np.asarray(M, dtype=float))

    def rows():
        for i in range(M.shape[0]):
            for j in range(M.shape[1]):
                v = M[i, j]
                if v != 0.0:
                    yield (str(i), str(j), format_number(v))

    return _write_lines(path, "row,col,value", rows())


def read_matrix_csv(path, shape=None) -> np.ndarray:
    """Inverse of write_matrix_csv; shape defaults to the largest index."""
    entries = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "row,col,value":
            raise ConfigError(f"{path}: unexpected header {header!r}")
        for line in fh:
            i, j, v = line.strip().split(",")
            entries.append((int(i), int(j), float(v)))
    if shape is None:
        if not entries:
            raise ConfigError(f"{path}: empty matrix with no shape given")
        shape = (max(e[0] for e in entries) + 1, max(e[1] for e in entries) + 1)
    M = np.zeros(shape)
    for i, j, v in entries:
        M[i, j] = v
    return M


def write_trajectory_csv(path, traj: Trajectory, hamiltonian=None) -> Path:
    """One row per stored step: t,u_1..u_m,y_1..y_p,H."""
    m = traj.inputs.shape[1]
    p = traj.outputs.shape[1]
    H = hamiltonian if hamiltonian is not None else traj.hamiltonian
    header = (
        "t,"
        + ",".join(f"u_{k + 1}" for k in range(m))
        + ","
        + ",".join(f"y_{k + 1}" for k in range(p))
        + ",H"
    )

    def rows():
        for k in range(traj.times.size):
            vals = [format_number(traj.times[k])]
            vals += [format_number(v) for v in traj.inputs[k]]
            vals += [format_number(v) for v in traj.outputs[k]]
            vals.append(format_number(H[k]) if H is not None else "nan")
            yield vals

    return _write_lines(path, header, rows())


def write_snapshot_csv(path, t: float, nodes: np.ndarray, fields: np.ndarray) -> Path:
    """State snapshot of one variable group: t,zeta,field_1..field_n.

    fields has one column per field, one row per mesh node.
    """
    n_fields = fields.shape[1]
    header = "t,zeta," + ",".join(f"field_{k + 1}" for k in range(n_fields))

    def rows():
        for i, z in enumerate(nodes):
            vals = [format_number(t), format_number(z)]
            vals += [format_number(v) for v in fields[i]]
            yield vals

    return _write_lines(path, header, rows())


def write_bode_csv(path, omegas: np.ndarray, response: np.ndarray) -> Path:
    """Frequency response export: omega,mag_ij,phase_ij per channel pair."""
    response = np.asarray(response)
    if response.ndim != 3:
        raise ShapeMismatch("response must be (n_freq, p, m)")
    _, p, m = response.shape
    cols = []
    for i in range(p):
        for j in range(m):
            cols += [f"mag_{i + 1}{j + 1}", f"phase_{i + 1}{j + 1}"]
    header = "omega," + ",".join(cols)

    def rows():
        for k, w in enumerate(omegas):
            vals = [format_number(w)]
            for i in range(p):
                for j in range(m):
                    g = response[k, i, j]
                    vals.append(format_number(abs(g)))
                    vals.append(format_number(np.angle(g)))
            yield vals

    return _write_lines(path, header, rows())


def _canonical_index(vec: np.ndarray) -> int:
    """Index of the unit coordinate vector, or -1 if not canonical."""
    v = np.asarray(vec)
    if np.max(np.abs(v.imag)) > 0.0:
        return -1
    r = v.real
    k = int(np.argmax(np.abs(r)))
    probe = np.zeros_like(r)
    probe[k] = 1.0
    return k if np.array_equal(r, probe) else -1


def write_data_csv(path, data: TangentialData) -> Path:
    """Tangential data rows: re_s,im_s,side,dir_index,re_w_*,im_w_*.

    Only canonical unit directions are representable; general
    directions (spectral-zero data) use the zeros CSV instead.
    """
    if data.n_inputs != data.n_outputs:
        raise ConfigError("single-file data export needs matching port counts")
    n = data.n_outputs
    header = (
        "re_s,im_s,side,dir_index,"
        + ",".join(f"re_w_{k + 1}" for k in range(n))
        + ","
        + ",".join(f"im_w_{k + 1}" for k in range(n))
    )

    def rows():
        for j in range(data.count):
            k = _canonical_index(data.right_dirs[:, j])
            if k < 0:
                raise ConfigError("right direction is not a canonical unit vector")
            s = data.right_points[j]
            w = data.right_values[:, j]
            yield (
                [format_number(s.real), format_number(s.imag), "right", str(k)]
                + [format_number(v.real) for v in w]
                + [format_number(v.imag) for v in w]
            )
        for i in range(data.count):
            k = _canonical_index(data.left_dirs[i])
            if k < 0:
                raise ConfigError("left direction is not a canonical unit vector")
            s = data.left_points[i]
            v = data.left_values[i]
            yield (
                [format_number(s.real), format_number(s.imag), "left", str(k)]
                + [format_number(x.real) for x in v]
                + [format_number(x.imag) for x in v]
            )

    return _write_lines(path, header, rows())


def read_data_csv(path) -> TangentialData:
    """Inverse of write_data_csv."""
    rp, rd, rv, lp, ld, lv = [], [], [], [], [], []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header[:4] != ["re_s", "im_s", "side", "dir_index"]:
            raise ConfigError(f"{path}: unexpected data header")
        n = sum(1 for c in header if c.startswith("re_w_"))
        for line in fh:
            parts = line.strip().split(",")
            s = complex(float(parts[0]), float(parts[1]))
            side = parts[2]
            k = int(parts[3])
            re = [float(x) for x in parts[4:4 + n]]
            im = [float(x) for x in parts[4 + n:4 + 2 * n]]
            w = np.array(re) + 1j * np.array(im)
            d = np.zeros(n, dtype=complex)
            d[k] = 1.0
            if side == "right":
                rp.append(s), rd.append(d), rv.append(w)
            elif side == "left":
                lp.append(s), ld.append(d), lv.append(w)
            else:
                raise ConfigError(f"{path}: unknown side {side!r}")
    if not rp or not lp:
        raise ConfigError(f"{path}: need rows for both sides")
    return TangentialData(
        right_points=np.array(rp),
        right_dirs=np.column_stack(rd),
        right_values=np.column_stack(rv),
        left_points=np.array(lp),
        left_dirs=np.vstack(ld),
        left_values=np.vstack(lv),
    )


def write_zeros_csv(path, zset: SpectralZeroSet) -> Path:
    """Spectral zeros with directions: re_s,im_s,re_r_*,im_r_*."""
    n = zset.directions.shape[0]
    header = (
        "re_s,im_s,"
        + ",".join(f"re_r_{k + 1}" for k in range(n))
        + ","
        + ",".join(f"im_r_{k + 1}" for k in range(n))
    )

    def rows():
        for j in range(zset.count):
            s = zset.zeros[j]
            r = zset.directions[:, j]
            yield (
                [format_number(s.real), format_number(s.imag)]
                + [format_number(v.real) for v in r]
                + [format_number(v.imag) for v in r]
            )

    return _write_lines(path, header, rows())


def write_certificate_csv(path, cert: PassivityCertificate) -> Path:
    """Per-frequency Popov minima: omega,min_popov_eig."""

    def rows():
        for w, v in zip(cert.grid, cert.min_popov_eig):
            yield [format_number(w), format_number(v)]

    return _write_lines(path, "omega,min_popov_eig", rows())


def write_energy_csv(path, times, energy) -> Path:
    """Scalar energy trace: t,H."""

    def rows():
        for t, h in zip(times, energy):
            yield [format_number(t), format_number(h)]

    return _write_lines(path, "t,H", rows())


def write_compare_csv(path, times, output_error, state_error=None) -> Path:
    """Per-time comparison: t,output_error[,lifted_state_error]."""
    header = "t,output_error"
    if state_error is not None:
        header += ",lifted_state_error"

    def rows():
        for k, t in enumerate(times):
            vals = [format_number(t), format_number(output_error[k])]
            if state_error is not None:
                vals.append(format_number(state_error[k]))
            yield vals

    return _write_lines(path, header, rows())


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(directory, files, extra: dict | None = None) -> Path:
    """manifest.json listing every artifact with its content hash."""
    directory = Path(directory)
    entry = {
        "files": {Path(f).name: sha256_of(f) for f in files},
    }
    if extra:
        entry.update(extra)
    path = directory / "manifest.json"
    with open(path, "w", newline="\n") as fh:
        json.dump(entry, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
