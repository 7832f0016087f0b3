"""CSV round trips, number formatting, manifests."""

import json

import numpy as np

from phmor.artifacts import (
    format_number,
    read_data_csv,
    read_matrix_csv,
    sha256_of,
    write_certificate_csv,
    write_compare_csv,
    write_data_csv,
    write_energy_csv,
    write_manifest,
    write_matrix_csv,
    write_trajectory_csv,
    write_zeros_csv,
)
from phmor.loewner import generate_data
from phmor.passive import passivity_check, spectral_zeros
from phmor.simulate import DescriptorSystem, simulate, to_descriptor

from conftest import assemble


def scalar_lag():
    return DescriptorSystem(
        E=np.array([[1.0]]),
        A=np.array([[-1.0]]),
        B=np.array([[1.0]]),
        C=np.array([[1.0]]),
    )


def test_format_number_roundtrip(rng):
    values = np.concatenate(
        [
            rng.standard_normal(50),
            rng.standard_normal(10) * 1e300,
            rng.standard_normal(10) * 1e-300,
            [0.0, 1.0, -1.0, np.pi, 2.0 / 3.0],
        ]
    )
    for x in values:
        assert float(format_number(float(x))) == float(x)


def test_format_number_folds_negative_zero():
    assert format_number(-0.0) == format_number(0.0)


def test_matrix_roundtrip(tmp_path, rng):
    M = rng.standard_normal((7, 5))
    M[rng.uniform(size=M.shape) < 0.3] = 0.0
    path = write_matrix_csv(tmp_path / "m.csv", M)
    back = read_matrix_csv(path, shape=M.shape)
    assert np.array_equal(back, M)
    # zero entries are omitted from the file
    n_lines = sum(1 for _ in open(path)) - 1
    assert n_lines == np.count_nonzero(M)


def test_files_use_lf_endings(tmp_path):
    M = np.array([[1.5, 0.0], [0.0, -2.25]])
    path = write_matrix_csv(tmp_path / "m.csv", M)
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")


def test_data_roundtrip(tmp_path):
    data = generate_data(scalar_lag(), [0.5, 1.5, 3.0, 7.0])
    path = write_data_csv(tmp_path / "data.csv", data)
    back = read_data_csv(path)
    assert np.array_equal(back.right_points, data.right_points)
    assert np.array_equal(back.left_points, data.left_points)
    assert np.array_equal(back.right_dirs, data.right_dirs)
    assert np.array_equal(back.left_dirs, data.left_dirs)
    assert np.array_equal(back.right_values, data.right_values)
    assert np.array_equal(back.left_values, data.left_values)


def test_trajectory_header_and_energy(tmp_path, wave_mixed_model):
    fom = assemble(wave_mixed_model, 10)
    sys = to_descriptor(fom)
    traj = simulate(sys, dt=1e-2, n_steps=20, u=lambda t: np.array([1.0, 0.0]))
    path = write_trajectory_csv(tmp_path / "traj.csv", traj)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,u_1,u_2,y_1,y_2,H"
    assert len(lines) == 22
    row0 = lines[1].split(",")
    assert float(row0[0]) == 0.0
    assert float(row0[-1]) == traj.hamiltonian[0]


def test_energy_and_compare_csv(tmp_path):
    times = np.linspace(0.0, 1.0, 5)
    energy = np.linspace(2.0, 1.0, 5)
    path = write_energy_csv(tmp_path / "h.csv", times, energy)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,H"
    assert len(lines) == 6

    path2 = write_compare_csv(tmp_path / "cmp.csv", times, energy, state_error=energy)
    assert path2.read_text().splitlines()[0] == "t,output_error,lifted_state_error"


def test_zeros_and_certificate_csv(tmp_path):
    cert = passivity_check(scalar_lag(), grid=np.geomspace(0.1, 10.0, 12))
    cpath = write_certificate_csv(tmp_path / "cert.csv", cert)
    lines = cpath.read_text().splitlines()
    assert lines[0] == "omega,min_popov_eig"
    assert len(lines) == 13

    from phmor.loewner import as_realization, build_pencil, real_transform, svd_truncate

    data = generate_data(scalar_lag(), [0.8, 2.5])
    rom, _, _ = svd_truncate(real_transform(as_realization(build_pencil(data))))
    zset = spectral_zeros(rom, Dr=np.eye(1))
    zpath = write_zeros_csv(tmp_path / "zeros.csv", zset)
    zlines = zpath.read_text().splitlines()
    assert zlines[0] == "re_s,im_s,re_r_1,im_r_1"
    assert len(zlines) == 1 + zset.count


def test_manifest_hashes(tmp_path, rng):
    a = write_matrix_csv(tmp_path / "a.csv", rng.standard_normal((3, 3)))
    b = write_matrix_csv(tmp_path / "b.csv", rng.standard_normal((2, 4)))
    mpath = write_manifest(tmp_path, [a, b], extra={"note": "x"})
    doc = json.loads(mpath.read_text())
    assert doc["files"]["a.csv"] == sha256_of(a)
    assert doc["files"]["b.csv"] == sha256_of(b)
    assert doc["note"] == "x"


def test_writes_are_deterministic(tmp_path, rng):
    M = rng.standard_normal((6, 6))
    p1 = write_matrix_csv(tmp_path / "m1.csv", M)
    p2 = write_matrix_csv(tmp_path / "m2.csv", M)
    assert p1.read_bytes() == p2.read_bytes()
