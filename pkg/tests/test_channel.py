import numpy as np
import pytest

from conftest import random_channels, random_rotation
from quasiinv.channel import (
    AffineMap,
    QubitChannel,
    affine_closed_form,
    affine_of,
    antisymmetric_from_vector,
    check_tetrahedron,
    choi_of,
    compose,
    conjugate,
    fujiwara_algoet_margins,
    from_kraus,
    identity_channel,
    is_completely_positive,
    make_amplitude_damping,
    make_diagonal,
    make_mixed_rotation,
    make_pauli,
    make_tetrahedron,
    make_tetrahedron_pair,
    make_unitary,
    mixture,
    random_channel,
    split_affine,
)
from quasiinv.errors import InvalidInputError, NotCompletelyPositiveError, TracePreservationError
from quasiinv.pauli import IDENTITY, PAULI_STACK, SIGMA_X, SIGMA_Y, SIGMA_Z, UnitaryRotation, bloch_of_density, density_of_bloch

PAULI_EX = (0.1, 0.6, 0.2, 0.1)


def oracle_affine(ch: QubitChannel) -> AffineMap:
    """M and t by explicit sums of 2x2 products, one basis element at a time."""
    Ks = ch.matrices()

    def E(X):
        return sum(K @ X @ K.conj().T for K in Ks)

    M = np.array([[0.5 * np.trace(PAULI_STACK[a] @ E(PAULI_STACK[b])).real for b in range(3)] for a in range(3)])
    t = np.array([0.5 * np.trace(PAULI_STACK[a] @ E(IDENTITY)).real for a in range(3)])
    return AffineMap(M, t)


def family_channels():
    return {
        "pauli": make_pauli(*PAULI_EX),
        "mixed_rotation": make_mixed_rotation(0.2, 1.1),
        "tetrahedron": make_tetrahedron(0.05, 0.1, 0.2, 0.15),
        "tetrahedron_pair": make_tetrahedron_pair(0.3, 0.1),
        "amplitude_damping": make_amplitude_damping(0.6),
        "amplitude_damping_neg": make_amplitude_damping(-0.5),
        "twisted_amplitude_damping": make_amplitude_damping(0.6, twisted=True),
        "diagonal": make_diagonal(0.3, -0.2, 0.1),
    }


# --- from_kraus -------------------------------------------------------------------


def test_from_kraus_identity():
    ch = from_kraus([IDENTITY])
    assert ch.affine.allclose(AffineMap.identity(), atol=1e-15)


def test_from_kraus_pauli_list_matches_constructor():
    p = np.array(PAULI_EX)
    ops = [np.sqrt(p[0]) * IDENTITY, np.sqrt(p[1]) * SIGMA_X, np.sqrt(p[2]) * SIGMA_Y, np.sqrt(p[3]) * SIGMA_Z]
    assert from_kraus(ops).equivalent(make_pauli(*PAULI_EX))


def test_from_kraus_reports_residual():
    with pytest.raises(TracePreservationError) as err:
        from_kraus([IDENTITY / np.sqrt(2), SIGMA_X])
    assert abs(err.value.residual - 0.5) < 1e-12
    assert "5.000e-01" in str(err.value)


def test_from_kraus_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        from_kraus([])
    with pytest.raises(InvalidInputError):
        from_kraus([[[np.inf, 0], [0, 1]]])


def test_trace_preservation_within_tolerance_accepted():
    ops = [IDENTITY * np.sqrt(1 + 5e-10)]
    assert len(from_kraus(ops)) == 1


# --- affine map -------------------------------------------------------------------


def test_affine_examples():
    ch = make_pauli(*PAULI_EX)
    assert np.allclose(ch.M, np.diag([0.4, -0.4, -0.6]), atol=1e-15)
    assert np.allclose(ch.t, 0, atol=1e-15)
    assert identity_channel().affine.allclose(AffineMap.identity(), atol=1e-15)
    ad = make_amplitude_damping(0.6)
    assert np.allclose(ad.M, np.diag([0.6, 0.6, 0.36]), atol=1e-15)
    assert np.allclose(ad.t, [0, 0, 0.64], atol=1e-15)


def test_affine_matches_oracle_on_families():
    for name, ch in family_channels().items():
        assert ch.affine.allclose(oracle_affine(ch), atol=1e-14), name


def test_affine_trace_formula_vs_closed_form(rng):
    for ch in random_channels(rng, 1000):
        cf = affine_closed_form(ch)
        assert np.max(np.abs(cf.affine.M - ch.M)) < 1e-12
        assert np.max(np.abs(cf.affine.t - ch.t)) < 1e-12
        assert abs(np.trace(ch.M) - (3 - 4 * np.trace(cf.B))) < 1e-12


def test_closed_form_examples():
    g = 0.7
    cf = affine_closed_form(make_amplitude_damping(g, twisted=True))
    assert np.allclose(cf.split.v, [0, 0, g], atol=1e-15)
    cf = affine_closed_form(make_pauli(*PAULI_EX))
    assert np.allclose(cf.split.v, 0, atol=0) and np.allclose(cf.split.A, 0, atol=0)
    assert np.allclose(cf.split.S, np.diag([0.4, -0.4, -0.6]), atol=1e-15)
    cf = affine_closed_form(make_amplitude_damping(0.6))
    assert np.allclose(cf.B, np.diag([0.16, 0.16, 0.04]), atol=1e-15)


def test_split_affine_parts(rng):
    M = rng.standard_normal((3, 3))
    s = split_affine(M)
    # exact up to one rounding of the half-sums
    assert np.max(np.abs(s.S + s.A - M)) <= 1e-15 * np.max(np.abs(M))
    assert np.allclose(s.S, s.S.T, atol=0) and np.allclose(s.A, -s.A.T, atol=0)
    assert np.array_equal(antisymmetric_from_vector(s.v), s.A)
    # A[a, b] = -eps[a, b, c] v[c]
    assert s.A[0, 1] == -s.v[2] and s.A[1, 2] == -s.v[0] and s.A[2, 0] == -s.v[1]


def test_tr_m_identity_on_families():
    for name, ch in family_channels().items():
        cf = affine_closed_form(ch)
        assert abs(np.trace(ch.M) - (3 - 4 * np.trace(cf.B))) < 1e-12, name


def test_unital_families_and_ad_shift():
    for name, ch in family_channels().items():
        if "amplitude" in name:
            continue
        assert np.linalg.norm(ch.t) < 1e-12, name
        assert ch.affine.is_unital
    for g in (-0.5, 0.0, 0.3, 0.9):
        for tw in (False, True):
            assert np.allclose(make_amplitude_damping(g, tw).t, [0, 0, 1 - g * g], atol=1e-12)


# --- Choi and complete positivity -------------------------------------------------------


def test_choi_identity():
    choi = choi_of(identity_channel())
    assert np.allclose(choi.eigenvalues, [2, 0, 0, 0], atol=1e-14)
    assert abs(choi.trace - 2) < 1e-14


def test_choi_amplitude_damping_psd():
    rep = is_completely_positive(make_amplitude_damping(0.6))
    assert rep and rep.min_eigenvalue >= -1e-12
    assert np.allclose(rep.choi.matrix, rep.choi.matrix.conj().T, atol=1e-12)


def test_choi_of_non_cp_affine_map():
    aff = AffineMap(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    rep = is_completely_positive(aff)
    assert not rep
    assert rep.min_eigenvalue < -0.5
    m = fujiwara_algoet_margins(1, 1, -1)
    assert m["(1+l3)^2 >= (l1+l2)^2"] == -4


def test_choi_trace_two_on_random(rng):
    for ch in random_channels(rng, 200):
        choi = choi_of(ch)
        assert abs(choi.trace - 2) < 1e-9
        assert choi.min_eigenvalue >= -1e-12
        # affine-only path agrees with the Kraus path
        assert np.allclose(choi_of(ch.affine).matrix, choi.matrix, atol=1e-12)


def test_choi_psd_iff_fujiwara_algoet():
    rng = np.random.default_rng(3)
    lams = rng.uniform(-1, 1, size=(10_000, 3))
    checked = 0
    for l1, l2, l3 in lams:
        margins = fujiwara_algoet_margins(l1, l2, l3)
        if min(abs(m) for m in margins.values()) < 1e-9:
            continue
        fa = min(margins.values()) >= 0
        cp = bool(is_completely_positive(AffineMap(np.diag([l1, l2, l3]), np.zeros(3))))
        assert fa == cp
        checked += 1
    assert checked > 9900


# --- apply -------------------------------------------------------------------------


def test_apply_examples():
    dep = make_pauli(0.25, 0.25, 0.25, 0.25)
    assert np.allclose(dep.M, 0, atol=1e-15)
    assert np.allclose(dep.apply([0.3, -0.2, 0.5]), 0, atol=1e-15)
    r = np.array([0.6, 0.0, -0.8])
    assert np.allclose(identity_channel().apply(r), r, atol=0)
    assert np.allclose(make_amplitude_damping(0.6).apply([0, 0, -1]), [0, 0, 0.28], atol=1e-15)


def test_apply_rejects_unphysical():
    with pytest.raises(InvalidInputError):
        identity_channel().apply([1.0, 0.1, 0.0])


def test_apply_kraus_vs_affine(rng):
    chans = random_channels(rng, 1000)
    for ch in chans:
        r = rng.standard_normal(3)
        r *= rng.uniform() ** (1 / 3) / np.linalg.norm(r)
        via_kraus = bloch_of_density(ch.apply_density(density_of_bloch(r)))
        assert np.max(np.abs(via_kraus - ch.apply(r))) < 1e-12


# --- composition -------------------------------------------------------------------


def test_compose_examples():
    X = make_unitary(UnitaryRotation(0, [1, 0, 0]))
    assert compose(X, X).equivalent(identity_channel(), atol=1e-15)
    assert np.allclose(compose(X, make_pauli(*PAULI_EX)).M, np.diag([0.4, 0.4, 0.6]), atol=1e-15)
    half = make_pauli(0, 0.5, 0.5, 0)
    assert np.allclose(compose(X, half).M, np.diag([0, 0, 1]), atol=1e-15)


def test_compose_affine_law(rng):
    for _ in range(300):
        c1, c2 = random_channel(rng, rng.integers(1, 5)), random_channel(rng, rng.integers(1, 5))
        law = c1.affine.then(c2.affine)
        got = compose(c2, c1)
        assert np.max(np.abs(got.M - law.M)) < 1e-12
        assert np.max(np.abs(got.t - law.t)) < 1e-12
        assert len(got) == len(c1) * len(c2)


def test_conjugate_matches_rotations(rng):
    ch = random_channel(rng, 3)
    U = random_rotation(rng)
    R = U.rotation()
    got = conjugate(ch, U)
    assert np.allclose(got.M, R @ ch.M @ R.T, atol=1e-12)
    assert np.allclose(got.t, R @ ch.t, atol=1e-12)


def test_mixture_affine_is_convex(rng):
    c1, c2 = random_channel(rng, 2), random_channel(rng, 4)
    mix = mixture([c1, c2], [0.3, 0.7])
    assert np.allclose(mix.M, 0.3 * c1.M + 0.7 * c2.M, atol=1e-12)
    assert np.allclose(mix.t, 0.3 * c1.t + 0.7 * c2.t, atol=1e-12)


# --- families ------------------------------------------------------------------------


def test_pauli_family():
    assert make_pauli(1, 0, 0, 0).equivalent(identity_channel())
    cf = affine_closed_form(make_pauli(*PAULI_EX))
    assert np.allclose(cf.B, np.diag([0.6, 0.2, 0.1]), atol=1e-15)
    with pytest.raises(InvalidInputError):
        make_pauli(0.5, 0.6, 0, 0)
    with pytest.raises(InvalidInputError):
        make_pauli(-0.1, 0.6, 0.3, 0.2)


def test_pauli_m_formula(rng):
    for _ in range(50):
        p = rng.dirichlet(np.ones(4))
        M = make_pauli(*p).M
        expected = [p[0] + p[1] - p[2] - p[3], p[0] - p[1] + p[2] - p[3], p[0] - p[1] - p[2] + p[3]]
        assert np.allclose(M, np.diag(expected), atol=1e-14)


def test_mixed_rotation_family():
    assert make_mixed_rotation(0.25, 0.0).equivalent(identity_channel(), atol=1e-15)
    assert make_mixed_rotation(1 / 3, np.pi).equivalent(make_pauli(0, 1 / 3, 1 / 3, 1 / 3), atol=1e-15)
    v = affine_closed_form(make_mixed_rotation(1 / 3, 2 * np.pi / 3)).split.v
    assert np.allclose(v, 0.28867513 * np.ones(3), atol=1e-8)
    p, th = 0.2, 1.3
    assert np.allclose(affine_closed_form(make_mixed_rotation(p, th)).split.v, p * np.sin(th), atol=1e-15)
    with pytest.raises(InvalidInputError):
        make_mixed_rotation(0.4, 1.0)


def test_mixed_rotation_kraus_are_rotations():
    p, th = 0.2, 0.9
    ch = make_mixed_rotation(p, th)
    for k, K in enumerate(ch.matrices()[1:]):
        sigma = PAULI_STACK[k]
        U = np.cos(th / 2) * IDENTITY - 1j * np.sin(th / 2) * sigma
        assert np.allclose(K, np.sqrt(p) * U, atol=1e-15)


def test_tetrahedron_family():
    assert make_tetrahedron(0, 0, 0, 0).equivalent(identity_channel(), atol=0)
    with pytest.raises(InvalidInputError):
        make_tetrahedron(0.3, 0.3, 0.3, 0.3)


def test_tetrahedron_pair_b_matrix():
    p, pp = 0.3, 0.1
    B = affine_closed_form(make_tetrahedron_pair(p, pp)).B
    expected = np.array([[2 * p + 2 * pp, 2 * p - 2 * pp, 0], [2 * p - 2 * pp, 2 * p + 2 * pp, 0], [0, 0, 2 * p + 2 * pp]]) / 3
    assert np.allclose(B, expected, atol=1e-15)
    w, V = np.linalg.eigh(B)
    assert np.allclose(sorted(w), [4 * pp / 3, (2 * p + 2 * pp) / 3, 4 * p / 3], atol=1e-15)
    top = V[:, np.argmax(w)]
    assert abs(abs(top @ np.array([1, 1, 0]) / np.sqrt(2)) - 1) < 1e-12


def test_tetrahedron_labeling_as_printed_gives_other_axis():
    # weights p on u1, u2 and p' on u0, u3 flip the sign of the xy entry
    p, pp = 0.3, 0.1
    B = affine_closed_form(make_tetrahedron(pp, p, p, pp)).B
    assert abs(B[0, 1] - (2 * pp - 2 * p) / 3) < 1e-15


def test_tetrahedron_pair_domain():
    with pytest.raises(InvalidInputError):
        make_tetrahedron_pair(0.4, 0.2)


def test_amplitude_damping_family():
    ch = make_amplitude_damping(0.0)
    assert np.allclose(ch.M, 0, atol=1e-15) and np.allclose(ch.t, [0, 0, 1], atol=1e-15)
    rho = density_of_bloch([0.3, 0.4, -0.5])
    assert np.allclose(ch.apply_density(rho), np.diag([1, 0]), atol=1e-15)
    for g in (1.0, -1.0, 1.5):
        with pytest.raises(InvalidInputError):
            make_amplitude_damping(g)
    K0 = make_amplitude_damping(0.6, twisted=True).matrices()[0]
    assert np.allclose(K0, np.diag([1, 0.6j]), atol=1e-15)


def test_diagonal_family():
    assert make_diagonal(1, 1, 1).equivalent(identity_channel(), atol=1e-15)
    assert make_diagonal(0, 0, -1).equivalent(make_pauli(0, 0.5, 0.5, 0), atol=1e-15)
    with pytest.raises(NotCompletelyPositiveError, match=r"\(1\+l3\)\^2 >= \(l1\+l2\)\^2"):
        make_diagonal(1, 1, -1)
    lam = (0.3, -0.2, 0.1)
    assert np.allclose(make_diagonal(*lam).M, np.diag(lam), atol=1e-15)
    check_tetrahedron(0.5, 0.5, 0.5)


def test_random_channel_sizes(rng):
    for k in (1, 2, 3, 4):
        ch = random_channel(rng, k)
        assert len(ch) == k
        assert is_completely_positive(ch)
    with pytest.raises(InvalidInputError):
        random_channel(rng, 5)
