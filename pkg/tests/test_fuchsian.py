"""Group model of the genus-2 surface: generators, reduction, words, axes."""
import numpy as np
import pytest

from anosovlab.fuchsian import (
    APOTHEM,
    TRANSLATION_LENGTH,
    VERTEX_RADIUS,
    DirichletDomain,
    axis_seed,
    bolza_generators,
    closed_geodesic_elements,
    cosh_dist_hp,
    disk_to_matrix,
    dist_hp,
    flow_matrix,
    group_words,
    halfplane_to_matrix,
    matrix_angle_hp,
    matrix_base_point,
    matrix_to_disk,
    mobius,
    reverse_matrix,
    to_disk,
    to_halfplane,
)


def test_octagon_constants():
    # regular right-angled octagon: in-radius arccosh(1+sqrt 2), out-radius
    # arccosh(cot^2(pi/8)); frozen decimals guard against silent edits
    assert APOTHEM == pytest.approx(1.5285709194809982, abs=1e-15)
    assert TRANSLATION_LENGTH == pytest.approx(3.0571418389619964, abs=1e-15)
    assert VERTEX_RADIUS == pytest.approx(
        float(np.arccosh(1.0 / np.tan(np.pi / 8.0) ** 2)), abs=1e-12
    )


def test_distance_formulas():
    # d(i, i e^t) = t along the imaginary axis
    for t in (0.3, 1.0, 2.7):
        assert cosh_dist_hp(1j, 1j * np.exp(t)) == pytest.approx(np.cosh(t), rel=1e-14)
        assert dist_hp(1j, 1j * np.exp(t)) == pytest.approx(t, rel=1e-12)
    # Cayley map is an isometry between the models
    z1, z2 = 0.4 + 1.3j, -0.2 + 0.7j
    w1, w2 = to_disk(z1), to_disk(z2)
    from anosovlab.fuchsian import dist_disk

    assert dist_disk(w1, w2) == pytest.approx(dist_hp(z1, z2), rel=1e-12)
    assert to_halfplane(w1) == pytest.approx(z1, rel=1e-12)


def test_generators_are_side_pairings():
    g = bolza_generators()
    assert g.shape == (4, 2, 2)
    dets = g[:, 0, 0] * g[:, 1, 1] - g[:, 0, 1] * g[:, 1, 0]
    np.testing.assert_allclose(dets, 1.0, atol=1e-14)
    # translations by the side-pairing length, trace 2 cosh(l/2) = 2(1+sqrt 2)
    np.testing.assert_allclose(np.trace(g, axis1=1, axis2=2),
                               2.0 * (1.0 + np.sqrt(2.0)), atol=1e-12)
    for k in range(4):
        moved = mobius(g[k], 1j)
        assert cosh_dist_hp(moved, 1j) == pytest.approx(
            np.cosh(TRANSLATION_LENGTH), rel=1e-13
        )
        # axis direction of generator k is k pi/4 in the disk
        ang = np.angle(to_disk(moved)) % (2.0 * np.pi)
        assert ang == pytest.approx(k * np.pi / 4.0, abs=1e-12)


def test_surface_group_relation():
    g = bolza_generators()
    inv = np.linalg.inv(g)
    word = g[0] @ inv[1] @ g[2] @ inv[3] @ inv[0] @ g[1] @ inv[2] @ g[3]
    np.testing.assert_allclose(word, np.eye(2), atol=1e-12)


def test_state_matrix_round_trip():
    rng = np.random.default_rng(2)
    z = rng.uniform(-0.8, 0.8, 40) + 1j * rng.uniform(0.4, 2.5, 40)
    th = rng.uniform(0.0, 2.0 * np.pi, 40)
    m = halfplane_to_matrix(z, th)
    dets = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    np.testing.assert_allclose(dets, 1.0, atol=1e-12)
    np.testing.assert_allclose(matrix_base_point(m), z, atol=1e-12)
    np.testing.assert_allclose(np.mod(matrix_angle_hp(m), 2 * np.pi), th, atol=1e-12)

    w, th_d = matrix_to_disk(m)
    m2 = disk_to_matrix(w, th_d)
    np.testing.assert_allclose(matrix_base_point(m2), z, atol=1e-11)


def test_reverse_matrix_flips_direction():
    m = halfplane_to_matrix(np.array([0.3 + 1.2j]), np.array([0.7]))
    r = reverse_matrix(m)
    assert matrix_base_point(r)[0] == pytest.approx(0.3 + 1.2j, rel=1e-13)
    dth = (matrix_angle_hp(r) - matrix_angle_hp(m))[0] % (2.0 * np.pi)
    assert dth == pytest.approx(np.pi, abs=1e-12)


class TestDirichletReduction:
    def setup_method(self):
        self.gens = bolza_generators()
        self.domain = DirichletDomain(self.gens)

    def test_radii(self):
        assert self.domain.in_radius == pytest.approx(APOTHEM)
        assert self.domain.out_radius == pytest.approx(VERTEX_RADIUS)

    def test_known_word_is_undone(self):
        rng = np.random.default_rng(5)
        # interior points, then push them out by various short words
        w0 = 0.3 * np.exp(1j * rng.uniform(0, 2 * np.pi, 30))
        z0 = to_halfplane(w0)
        words = [m for m, _ in group_words(self.gens, 2, include_identity=False)]
        for j in (0, 3, 17, 40):
            z = mobius(words[j], z0)
            xi = np.ones_like(z)
            zr, _, _ = self.domain.reduce_points(z.copy(), xi.copy())
            np.testing.assert_allclose(zr, z0, atol=1e-9)

    def test_reduction_is_idempotent(self):
        rng = np.random.default_rng(6)
        z, th = rng.uniform(-3, 3, 50) + 1j * rng.uniform(0.1, 4.0, 50), rng.uniform(
            0, 2 * np.pi, 50
        )
        g = halfplane_to_matrix(z, th)
        self.domain.reduce_matrices(g)
        z1 = matrix_base_point(g)
        assert np.all(cosh_dist_hp(z1, 1j) <= np.cosh(VERTEX_RADIUS) + 1e-9)
        g2 = g.copy()
        self.domain.reduce_matrices(g2)
        np.testing.assert_array_equal(g, g2)

    def test_matrix_and_point_reduction_agree(self):
        rng = np.random.default_rng(7)
        z = rng.uniform(-4, 4, 40) + 1j * rng.uniform(0.05, 6.0, 40)
        th = rng.uniform(0, 2 * np.pi, 40)
        g = halfplane_to_matrix(z, th)
        self.domain.reduce_matrices(g)
        psi = np.exp(1j * th) / z.imag
        zr, xir, _ = self.domain.reduce_points(z.copy(), psi.astype(complex))
        np.testing.assert_allclose(zr, matrix_base_point(g), atol=1e-9)
        np.testing.assert_allclose(
            np.mod(np.angle(xir), 2 * np.pi),
            np.mod(matrix_angle_hp(g), 2 * np.pi),
            atol=1e-9,
        )

    def test_quotient_distance_symmetry(self):
        rng = np.random.default_rng(8)
        w = 0.4 * np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
        z = to_halfplane(w)
        for a in z[:4]:
            for b in z[4:]:
                d1 = self.domain.quotient_dist(np.array([a]), complex(b))[0]
                d2 = self.domain.quotient_dist(np.array([b]), complex(a))[0]
                assert d1 == pytest.approx(d2, abs=1e-12)
                assert d1 <= dist_hp(a, b) + 1e-12


def test_group_words_counts():
    g = bolza_generators()
    # 8 letters, no immediate backtracking: 1 + 8 + 8*7 + 8*7^2
    for max_len, expect in ((1, 9), (2, 65), (3, 457)):
        assert sum(1 for _ in group_words(g, max_len)) == expect
    assert sum(1 for _ in group_words(g, 1, include_identity=False)) == 8


def test_closed_geodesics_systole_and_axes():
    g = bolza_generators()
    els = closed_geodesic_elements(g, 4)
    assert len(els) == 35  # distinct |trace| classes through length 4
    lengths = [ell for _, ell in els]
    assert lengths == sorted(lengths)
    assert lengths[0] == pytest.approx(TRANSLATION_LENGTH, abs=1e-12)

    for m, ell in els[:5]:
        seed, period = axis_seed(m)
        assert period == pytest.approx(ell, rel=1e-12)
        conj = np.linalg.inv(seed) @ m @ seed
        np.testing.assert_allclose(conj, flow_matrix(ell), atol=1e-9)

    assert len(closed_geodesic_elements(g, 6, limit=128)) == 128


def test_axis_seed_rejects_elliptic():
    rot = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    with pytest.raises(ValueError):
        axis_seed(rot)
