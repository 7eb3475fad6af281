import numpy as np
import pytest

from ldma.array import ArrayGeometry, Location, focusing_vector, steering_vector
from ldma.codebook import (
    CodebookFormatError,
    DFTCodebook,
    PolarCodebook,
    SphericalCodebook,
    UniformDistanceCodebook,
    UnsupportedVersionError,
    angular_grid,
    beta_delta_search,
    beta_delta_ula,
    build_dft_codebook,
    build_polar_codebook_ula,
    build_spherical_codebook,
    build_uniform_codebook,
    distance_rings,
    export_codebook,
    import_codebook,
)
from ldma.correlation import upa_distance_correlation_approx
from ldma.numerics import fresnel_ratio

UPA64 = ArrayGeometry.upa(64, 64)
UPA_SMALL = ArrayGeometry.upa(16, 8)
ULA = ArrayGeometry.ula(512)


def _gbar(geom, beta0, theta, phi):
    # Direct evaluation (no table) of |G(beta1) G(beta2)|.
    c, u = np.cos(theta), np.sin(theta) * np.sin(phi)
    b1 = geom.n1 * beta0 * np.sqrt(1 - c * c)
    b2 = geom.n2 * beta0 * np.sqrt(1 - u * u)
    return abs(fresnel_ratio(b1) * fresnel_ratio(b2))


def test_angular_grid_two_by_two():
    g = angular_grid(ArrayGeometry.upa(2, 2))
    np.testing.assert_allclose(sorted(set(np.round(np.cos(g["theta"]), 12))), [-0.5, 0.5])
    u = np.sin(g["theta"]) * np.sin(g["phi"])
    np.testing.assert_allclose(sorted(set(np.round(u, 12))), [-0.5, 0.5])


def test_angular_grid_orthogonal_and_bounded():
    g = angular_grid(UPA_SMALL)
    assert g["theta"].size + g["skipped"] == UPA_SMALL.n_antennas
    a = np.stack([steering_vector(UPA_SMALL, Location(np.inf, t, p)) for t, p in zip(g["theta"], g["phi"])])
    gram = np.abs(a.conj() @ a.T)
    np.testing.assert_allclose(gram, np.eye(len(a)), atol=1e-9)


def test_beta_delta_examples():
    th, ph = np.pi / 3, np.pi / 6
    b = beta_delta_search(0.55, th, ph, UPA64)
    assert 0.5 <= _gbar(UPA64, b, th, ph) <= 0.6
    assert beta_delta_search(1 - 1e-8, th, ph, UPA64) < 0.02 * b
    assert beta_delta_search(0.4, th, ph, UPA64) >= beta_delta_search(0.6, th, ph, UPA64)


def test_beta_delta_is_envelope_crossing():
    th, ph = 1.2, 0.3
    b = beta_delta_search(0.3, th, ph, UPA64)
    far = np.linspace(b, 20 * b, 4000)
    assert max(_gbar(UPA64, x, th, ph) for x in far) <= 0.3 + 1e-6
    assert _gbar(UPA64, 0.999 * b, th, ph) > 0.3 - 1e-3


def test_beta_delta_ula_matches_single_fresnel():
    b = beta_delta_ula(0.55)
    assert abs(fresnel_ratio(b)) == pytest.approx(0.55, abs=1e-6)
    xs = np.linspace(b, 50, 20000)
    assert np.abs(fresnel_ratio(xs)).max() <= 0.55 + 1e-6


def test_beta_delta_rejects_bad_delta():
    with pytest.raises(ValueError):
        beta_delta_search(1.2, 1.0, 0.0, UPA64)


def test_distance_rings():
    th, ph = np.pi / 3, np.pi / 6
    b = beta_delta_search(0.55, th, ph, UPA64)
    rings = distance_rings(th, ph, b, 0.3, UPA64)
    assert len(rings) >= 4
    assert rings[1] == pytest.approx(rings[0] / 2) and rings[3] == pytest.approx(rings[1] / 2)
    assert min(rings) >= 0.3
    for a, c in zip(rings[:-1], rings[1:]):
        assert upa_distance_correlation_approx(UPA64, a, c, th, ph) <= 0.55 + 0.05


def test_spherical_codebook_structure():
    cb = build_spherical_codebook(UPA_SMALL, 0.55, 0.05)
    grid = angular_grid(UPA_SMALL)
    assert len(cb) == grid["theta"].size * (cb.n_rings + 1)
    v = cb.vectors()
    np.testing.assert_allclose(np.abs(v), 1 / np.sqrt(UPA_SMALL.n_antennas), atol=1e-12)
    ring0 = v[cb.ring_indices(0)]
    np.testing.assert_allclose(ring0, build_dft_codebook(UPA_SMALL).vectors(), atol=1e-12)
    # Density: adjacent rings at one direction are separated by the threshold step.
    lam, d = UPA_SMALL.wavelength, UPA_SMALL.spacing
    for j in range(grid["theta"].size):
        idx = np.flatnonzero((cb.index1 == grid["index1"][j]) & (cb.index2 == grid["index2"][j]))
        inv = np.where(np.isinf(cb.r[idx]), 0.0, 1.0 / cb.r[idx])
        step = 2 * lam * cb.beta_delta[idx[0]] ** 2 / d**2
        assert np.all(np.diff(np.sort(inv)) >= step * (1 - 1e-12))


def test_spherical_codebook_collapses():
    # rings collapse to ring 0 once r_1 < rho_min at every direction
    cb = build_spherical_codebook(UPA_SMALL, 0.999, 1e4)
    assert cb.n_rings == 0
    assert len(cb) == len(build_dft_codebook(UPA_SMALL))


def test_spherical_ring_one_shell():
    cb = build_spherical_codebook(UPA_SMALL, 0.55, 0.05)
    ring1 = cb.ring_indices(1)
    lam, d = UPA_SMALL.wavelength, UPA_SMALL.spacing
    np.testing.assert_allclose(cb.r[ring1], d**2 / (2 * lam * cb.beta_delta[ring1] ** 2))
    assert np.ptp(cb.r[ring1]) > 0  # radius depends on direction


def test_polar_codebook():
    cb = build_polar_codebook_ula(ULA, 0.55, 4.0)
    v0 = cb.vectors(cb.ring_indices(0))
    np.testing.assert_allclose(np.abs(v0.conj() @ v0.T), np.eye(512), atol=1e-9)
    np.testing.assert_allclose(v0, build_dft_codebook(ULA).vectors(), atol=1e-12)
    assert np.all(cb.r[cb.ring > 0] >= 4.0)
    worst = 0.0
    for i in np.unique(cb.index1)[::16]:
        idx = np.flatnonzero(cb.index1 == i)
        idx = idx[np.argsort(cb.ring[idx])]
        w = cb.vectors(idx)
        c = np.abs(np.sum(w[:-1].conj() * w[1:], axis=1))
        worst = max(worst, c.max(initial=0.0))
    assert worst <= 0.55 + 0.1
    dft_only = build_polar_codebook_ula(ULA, 0.999, 1e6)
    assert dft_only.n_rings == 0 and len(dft_only) == 512


def test_uniform_codebook_size_match():
    ld = build_spherical_codebook(UPA_SMALL, 0.55, 0.05)
    un = build_uniform_codebook(UPA_SMALL, ld.n_rings, 0.05, 1.0)
    assert len(un) == len(ld)


def test_export_import_round_trip(tmp_path):
    cb = build_polar_codebook_ula(ArrayGeometry.ula(32), 0.55, 0.5)
    p = tmp_path / "cb.txt"
    export_codebook(cb, p)
    back = import_codebook(p)
    for attr in ("ring", "index1", "index2", "r", "theta", "phi"):
        np.testing.assert_array_equal(getattr(back, attr), getattr(cb, attr))
    np.testing.assert_array_equal(back.vectors(), cb.vectors())
    assert back.kind == cb.kind and back.delta == cb.delta


def test_import_errors(tmp_path):
    cb = build_dft_codebook(ArrayGeometry.ula(8))
    p = tmp_path / "cb.txt"
    export_codebook(cb, p)
    lines = p.read_text().splitlines()
    (tmp_path / "short.txt").write_text("\n".join(lines[:-2]) + "\n")
    with pytest.raises(CodebookFormatError):
        import_codebook(tmp_path / "short.txt")
    (tmp_path / "v2.txt").write_text("\n".join([lines[0].replace("NFCB1", "NFCB2")] + lines[1:]))
    with pytest.raises(UnsupportedVersionError):
        import_codebook(tmp_path / "v2.txt")
    (tmp_path / "bad.txt").write_text("\n".join(lines[:1] + ["0 0 0 x y z"] * (len(lines) - 1)))
    with pytest.raises(CodebookFormatError):
        import_codebook(tmp_path / "bad.txt")


def test_gains_fast_path_matches_dense():
    g = ArrayGeometry.upa(256, 16)
    cb = build_spherical_codebook(g, 0.55, 4.0)
    rng = np.random.default_rng(0)
    h = rng.standard_normal((2, g.n_antennas)) + 1j * rng.standard_normal((2, g.n_antennas))
    fast = cb.gains(h)
    idx = rng.choice(len(cb), 300, replace=False)
    dense = np.abs(h @ cb.vectors(idx).conj().T)
    np.testing.assert_allclose(fast[:, idx], dense, rtol=1e-10)


def test_estimators():
    est = PolarCodebook(ArrayGeometry.ula(64), delta=0.55, rho_min=1.0)
    assert est.get_params()["delta"] == 0.55
    assert est.fit() is est
    x = focusing_vector(est.geometry, Location(3.0, np.pi / 2, 0.1))[None, :] * 8
    gains = est.transform(x)
    assert gains.shape == (1, est.n_codewords_)
    assert DFTCodebook(ArrayGeometry.ula(16)).fit().n_codewords_ == 16
    assert SphericalCodebook(UPA_SMALL, rho_min=0.05).fit().codebook_.kind == "spherical"
    n_dir = angular_grid(UPA_SMALL)["theta"].size
    assert len(UniformDistanceCodebook(UPA_SMALL, 2, 1.0, 5.0).fit().codebook_) == 3 * n_dir
