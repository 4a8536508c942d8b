import numpy as np
import pytest

from bifbm import (
    BifBmParams,
    SheetParams,
    TimeGrid,
    cov_bifbm,
    cov_sheet,
    lamperti_cov,
    sample_cholesky,
    sample_lamperti,
    sample_paths,
    sample_sheet,
    sample_spectral,
)
from bifbm import pathio, rng
from bifbm.errors import CirculantEmbeddingError, GridError, ParameterError, TailMassError
from bifbm.sampler import _spectral_modes, cholesky_array, lamperti_array, spectral_array


def emp_cov(x):
    return x.T @ x / x.shape[0]


def se_of(x):
    prods = x[:, :, None] * x[:, None, :]
    return prods.std(axis=0, ddof=1) / np.sqrt(x.shape[0])


def test_cholesky_covariance():
    p = BifBmParams(0.6, 0.5)
    g = TimeGrid.uniform(1.0, 8)
    x = cholesky_array(g, p, 8000, 7)
    ref = cov_bifbm(g.points[:, None], g.points[None, :], p)
    assert np.max(np.abs(emp_cov(x) - ref) / se_of(x)) < 4.5


def test_zero_grid_and_origin():
    p = BifBmParams(0.3, 0.9)
    paths = sample_cholesky(TimeGrid([0.0]), p, 3, 1)
    assert all(np.all(pth.values == 0) for pth in paths)
    paths = sample_cholesky(TimeGrid.uniform(1.0, 10, include_zero=True), BifBmParams(0.3, 0.9, 2), 3, 1)
    assert all(np.all(pth.values[0] == 0) for pth in paths)
    lp = sample_lamperti(TimeGrid.log_uniform(0.01, 1, 64, True), p, 2, 1)
    assert all(np.all(pth.values[0] == 0) for pth in lp)


def test_brownian_qv():
    p = BifBmParams(0.5, 1.0)
    g = TimeGrid.log_uniform(2.0**-12, 1.0, 2**14, include_zero=True)
    arr, _ = lamperti_array(g, p, 10, 3)
    qv = np.sum(np.diff(arr, axis=1) ** 2, axis=1).mean()
    assert qv == pytest.approx(1.0, rel=0.03)


def test_determinism_and_workers(monkeypatch):
    p = BifBmParams(0.6, 0.5)
    g = TimeGrid.log_uniform(0.01, 1.0, 200, True)
    a = lamperti_array(g, p, 150, 42)[0]
    monkeypatch.setenv("BIFBM_THREADS", "4")
    b = lamperti_array(g, p, 150, 42)[0]
    c = np.concatenate([lamperti_array(g, p, 50, 42)[0], lamperti_array(g, p, 100, 42, path_offset=50)[0]])
    assert np.array_equal(a, b) and np.array_equal(a, c)
    u = TimeGrid.uniform(1.0, 32)
    assert np.array_equal(cholesky_array(u, p, 70, 5), cholesky_array(u, p, 70, 5))
    assert not np.array_equal(cholesky_array(u, p, 5, 5), cholesky_array(u, p, 5, 6))


def test_rng_streams():
    a = rng.normals(9, 5, 3, component=1, path_offset=2)
    assert np.array_equal(a[1], rng.stream(9, 3, 1).standard_normal(5))
    with pytest.raises(ParameterError):
        rng.check_seed(-1)
    with pytest.raises(ParameterError):
        rng.check_seed(2**64)


def test_component_independence():
    p = BifBmParams(0.6, 0.5, 2)
    g = TimeGrid.uniform(1.0, 4)
    paths = sample_cholesky(g, p, 4000, 11)
    x = np.array([pth.values[:, 0] for pth in paths])
    y = np.array([pth.values[:, 1] for pth in paths])
    cross = x.T @ y / len(paths)
    se = (x[:, :, None] * y[:, None, :]).std(axis=0) / np.sqrt(len(paths))
    assert np.max(np.abs(cross) / se) < 4


def test_lamperti_marginal_variance_and_stationarity():
    p = BifBmParams(0.4, 0.7)
    g = TimeGrid.log_uniform(0.05, 2.0, 32)
    arr, info = lamperti_array(g, p, 10_000, 13)
    var = (arr**2).mean(axis=0)
    se = (arr**2).std(axis=0) / np.sqrt(arr.shape[0])
    ref = g.points ** (2 * p.hk)
    assert np.all(np.abs(var - ref) < 3.5 * se)
    y = arr / g.points**p.hk  # stationary Lamperti process
    vy = (y**2).mean(axis=0)
    assert np.all(np.abs(vy - 1) < 3.5 * (y**2).std(axis=0) / np.sqrt(y.shape[0]))
    assert info["min_eigenvalue"] >= -1e-12 * info["embed_size"]


def test_toeplitz_vs_cholesky():
    p = BifBmParams(0.6, 0.5)
    g = TimeGrid.log_uniform(0.1, 1.0, 6)
    a = lamperti_array(g, p, 6000, 21, mode="toeplitz_exact")[0]
    b = cholesky_array(g, p, 6000, 22)
    diff = emp_cov(a) - emp_cov(b)
    se = np.sqrt(se_of(a) ** 2 + se_of(b) ** 2)
    assert np.max(np.abs(diff) / se) < 4.5


def test_circulant_failure_reports_floor():
    p = BifBmParams(0.9375, 0.8)
    g = TimeGrid.log_uniform(2.0**-12, 1.0, 2**16)
    with pytest.raises(CirculantEmbeddingError) as exc:
        lamperti_array(g, p, 1, 0)
    assert exc.value.min_eigenvalue < 0 and exc.value.embed_size >= 2**17


def test_lamperti_needs_geometric_grid():
    with pytest.raises(GridError):
        sample_lamperti(TimeGrid([0.1, 0.2, 0.5]), BifBmParams(0.5, 0.5), 1, 0)
    with pytest.raises(ParameterError):
        sample_lamperti(TimeGrid.log_uniform(0.1, 1, 4), BifBmParams(0.5, 0.5), 1, 0, mode="nope")


def _spectral_cov(p, n_modes, lam_max, tau):
    lams, w = _spectral_modes(p, n_modes, lam_max, None)
    return np.array([np.sum(w**2 * np.cos(lams * t)) for t in tau])


def test_spectral_refinement_halves_error():
    # band-limited covariance on [0, 20]: a fine cell sum is the reference
    p = BifBmParams(0.6, 0.5)
    tau = np.array([0.0, 0.5, 1.0, 2.0])
    ref = _spectral_cov(p, 2048, 20.0, tau)
    errs = [np.max(np.abs(_spectral_cov(p, n, 20.0, tau) - ref)) for n in (32, 64, 128)]
    assert errs[1] <= errs[0] / 2 and errs[2] <= errs[1] / 2


def test_spectral_variance_and_zero_density():
    p = BifBmParams(0.6, 0.5)
    paths = sample_spectral(TimeGrid([0.5, 1.0]), p, 2**12, 1e3, 4000, 17)
    v = np.mean([pth.values[-1, 0] ** 2 for pth in paths])
    assert v == pytest.approx(1.0, rel=0.05)
    assert paths[0].info["tail_mass"] < 0.05
    z = spectral_array(TimeGrid([0.5, 1.0]), p, 8, 10.0, 2, 1, density=lambda lam: 0.0)
    assert np.all(z == 0)
    with pytest.raises(TailMassError):
        sample_spectral(TimeGrid([1.0]), BifBmParams(0.3, 0.5), 16, 1.0, 1, 0, tail_tol=0.01)
    with pytest.raises(ParameterError):
        sample_spectral(TimeGrid([1.0]), p, 4, 1e3, 1, 0)


def test_dispatch():
    g = TimeGrid.log_uniform(0.1, 1, 8)
    p = BifBmParams(0.5, 0.5)
    for m in ("cholesky", "lamperti", "spectral"):
        assert sample_paths(m, g, p, 2, 0)[0].method == m
    with pytest.raises(ParameterError):
        sample_paths("euler", g, p, 1, 0)


def test_sheet():
    p1 = SheetParams(np.array([[0.6]]), np.array([[0.5]]))
    g = TimeGrid.uniform(1.0, 4)
    f = sample_sheet([g], p1, 3, 5)
    b = sample_cholesky(g, BifBmParams(0.6, 0.5), 3, 5)
    np.testing.assert_allclose(f[0].values[:, 0], b[0].values[:, 0], rtol=1e-12, atol=1e-14)

    p2 = SheetParams(np.array([[0.5, 0.7]]), np.array([[0.8, 0.6]]))
    ga, gb = TimeGrid.uniform(1.0, 3, True), TimeGrid.uniform(2.0, 4, True)
    fields = sample_sheet([ga, gb], p2, 3000, 8)
    v = np.array([fl.values[..., 0] for fl in fields])
    assert np.all(v[:, 0, :] == 0) and np.all(v[:, :, 0] == 0)
    var = (v**2).mean(axis=0)
    se = (v**2).std(axis=0) / np.sqrt(v.shape[0])
    for i, s in enumerate(ga.points):
        for j, t in enumerate(gb.points):
            ref = cov_sheet([s, t], [s, t], 0, p2)
            assert abs(var[i, j] - ref) <= 3.5 * se[i, j] + 1e-15
    with pytest.raises(GridError):
        sample_sheet([TimeGrid.uniform(1, 300), TimeGrid.uniform(1, 300)], p2, 1, 0)


def test_sheet_increment_bounds():
    # E(X(s) - X(t))^2 <= C sum_j |s_j - t_j|^{2 H_j K_j}, C from an exact scan
    p = SheetParams(np.array([[0.5, 0.7]]), np.array([[0.8, 0.6]]))
    hk = p.hk[0]
    pts = np.linspace(0.2, 1.0, 9)
    grid = [(a, b) for a in pts for b in pts]
    ratios = []
    for s in grid:
        for t in grid:
            if s == t:
                continue
            iv = cov_sheet(s, s, 0, p) + cov_sheet(t, t, 0, p) - 2 * cov_sheet(s, t, 0, p)
            ratios.append(iv / sum(abs(a - b) ** (2 * e) for a, b, e in zip(s, t, hk)))
    ratios = np.array(ratios)
    assert 0.1 < ratios.min() and ratios.max() < 3.0


def test_pathio_roundtrip(tmp_path):
    p = BifBmParams(0.6, 0.5, 2)
    path = sample_cholesky(TimeGrid.uniform(1.0, 7, True), p, 1, 99)[0]
    pathio.write_binary(path, tmp_path / "a.bin")
    back = pathio.read_binary(tmp_path / "a.bin")
    assert np.array_equal(back.values, path.values) and np.array_equal(back.t, path.t)
    assert (back.seed, back.method, back.params) == (99, "cholesky", p)
    pathio.write_csv(path, tmp_path / "a.csv")
    head = (tmp_path / "a.csv").read_text().splitlines()[0]
    assert head == "t,component_1,component_2"
    c = pathio.read_csv(tmp_path / "a.csv", p)
    assert np.array_equal(c.values, path.values)
    raw = (tmp_path / "a.bin").read_bytes()
    assert raw[:8] == b"BIFBMPTH"
    with pytest.raises(ParameterError):
        pathio.from_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(ParameterError):
        pathio.from_bytes(raw[:-8])
