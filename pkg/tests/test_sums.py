import math

import numpy as np
import pytest

from latzeta.errors import DivergenceError, DomainError
from latzeta.lattice import (
    LatticeBasis,
    apply_transform,
    d4_lattice,
    diagonal_lattice,
    direct_sum,
    fcc_lattice,
    hexagonal_lattice,
    integer_lattice,
    orthogonal_matrix,
)
from latzeta.sums import (
    EvalRequest,
    tail_bound,
    count_bound,
    theta,
    theta_from_zeta_limit,
    zeta_from_theta_quadrature,
    zeta_prime,
    zeta_prime_direct,
    zeta_q,
    zeta_q_psf,
)
from oracles import box_zeta_2d, theta1, zeta1_closed

Z1, Z2 = integer_lattice(1), integer_lattice(2)
TRIVIAL = LatticeBasis.trivial(0)


class TestTheta:
    def test_z1(self):
        r = theta(Z1, 1.0)
        assert r.value == pytest.approx(1.0864348112133, rel=1e-12)
        assert r.value == pytest.approx(theta1(1.0), rel=1e-14)
        assert 0 <= r.tail_bound <= 1e-12 * r.value and r.terms_used > 0

    def test_product_structure(self):
        assert theta(Z2, 1.0).value == pytest.approx(theta1(1.0) ** 2, rel=1e-12)
        assert theta(Z2, 1.0).value == pytest.approx(1.1803406, abs=1e-7)
        A, B = hexagonal_lattice(), fcc_lattice()
        for tau in (0.3, 1.0, 2.5):
            assert theta(direct_sum(A, B), tau).value == pytest.approx(
                theta(A, tau).value * theta(B, tau).value, rel=1e-10
            )

    def test_large_tau_and_errors(self):
        assert theta(Z1, 50.0).value == pytest.approx(1.0, abs=1e-12)
        assert theta(TRIVIAL, 1.0).value == 1.0
        with pytest.raises(DomainError):
            theta(Z1, 0.0)


class TestZetaPrime:
    def test_z1_closed_forms(self):
        assert zeta_prime_direct(Z1, 1, 0).value == pytest.approx(math.pi**2 / 3, rel=1e-10)
        assert zeta_prime_direct(Z1, 1, 3).value == pytest.approx(zeta1_closed(3.0), rel=1e-10)
        assert zeta_prime_direct(Z1, 1, 3).value == pytest.approx(1.4805341531637, rel=1e-10)

    def test_z2_against_box_oracle(self):
        ref = box_zeta_2d(np.eye(2), 2, 0.0, M=1000)
        assert zeta_prime_direct(Z2, 2, 0).value == pytest.approx(ref, rel=1e-9)
        assert zeta_prime_direct(Z2, 2, 0).value == pytest.approx(6.0268120, abs=1e-7)

    def test_zeta_q_z2_q1_against_box(self):
        ref = box_zeta_2d(np.eye(2), 2, 1.0, M=600) + 1.0
        assert zeta_q(Z2, 2, 1).value == pytest.approx(ref, rel=1e-9)

    def test_certified_tail(self):
        for L, s, q in [(Z2, 1.25, 0.0), (hexagonal_lattice(), 1.75, 0.5), (d4_lattice(), 2.75, 0.0)]:
            r = zeta_prime_direct(L, s, q, rel_tol=1e-9)
            assert r.tail_bound <= 1e-9 * r.value

    def test_divergence_and_domain(self):
        with pytest.raises(DivergenceError):
            zeta_prime_direct(Z2, 1.0, 0.0)
        with pytest.raises(DomainError):
            zeta_prime_direct(Z1, 1.0, -1.0)
        with pytest.raises(DomainError):
            zeta_q(Z1, 1.0, 0.0)
        with pytest.raises(DomainError):
            zeta_q_psf(Z1, 1.0, 0.0)
        with pytest.raises(DomainError):
            zeta_q_psf(Z2, 0.5, 1.0)

    def test_trivial_lattice(self):
        assert zeta_q(TRIVIAL, 1, 2).value == 0.5
        assert zeta_q_psf(TRIVIAL, 1, 2).value == pytest.approx(0.5)
        assert zeta_from_theta_quadrature(TRIVIAL, 1, 2).value == pytest.approx(0.5, rel=1e-12)
        assert zeta_prime(TRIVIAL, 1, 2).value == 0.0

    def test_methods_agree(self):
        L = diagonal_lattice([2, 0.5])
        a = zeta_prime(L, 3, 1, method="direct").value
        b = zeta_prime(L, 3, 1, method="psf").value
        assert a == pytest.approx(b, rel=1e-9)
        with pytest.raises(ValueError):
            zeta_prime(L, 3, 1, method="nope")


class TestPSF:
    def test_z1(self):
        assert zeta_q_psf(Z1, 1, 3).value == pytest.approx(zeta_q(Z1, 1, 3).value, rel=1e-9)
        assert zeta_q_psf(Z1, 1, 3).value == pytest.approx(zeta1_closed(3.0) + 1 / 3, rel=1e-10)

    def test_zero_frequency_term(self):
        # π^{1/2} 3^{-1/2} Γ(1/2)/Γ(1) = π/√3
        assert math.pi / math.sqrt(3) == pytest.approx(1.8137994, abs=1e-7)

    def test_skewed_diagonal(self):
        L = diagonal_lattice([2, 0.5])
        assert zeta_q_psf(L, 3, 1).value == pytest.approx(zeta_q(L, 3, 1).value, rel=1e-9)


class TestIdentities:
    @pytest.mark.parametrize("L,s,q", [(Z1, 1.0, 3.0), (Z2, 2.0, 1.0), (hexagonal_lattice(), 1.5, 0.5), (fcc_lattice(), 2.0, 2.0)])
    def test_quadrature(self, L, s, q):
        r = zeta_from_theta_quadrature(L, s, q)
        assert r.value == pytest.approx(zeta_q(L, s, q).value, rel=1e-6)

    def test_quadrature_z1_value(self):
        assert zeta_from_theta_quadrature(Z1, 1, 3).value == pytest.approx(1.8138674864970, rel=1e-8)

    def test_theta_limit(self):
        th = theta(Z1, 1.0).value
        seq = theta_from_zeta_limit(Z1, 1.0, [4, 64, 512])
        assert abs(seq[1] - th) <= 1e-2
        assert abs(seq[2] - th) <= 1e-3
        errs = [abs(v - th) for v in seq]
        assert errs == sorted(errs, reverse=True)
        assert theta_from_zeta_limit(TRIVIAL, 1.0, [1, 2, 3]) == [1.0, 1.0, 1.0]
        with pytest.raises(DomainError):
            theta_from_zeta_limit(Z1, 1.0, [5, 4])

    def test_q_to_zero(self):
        a = zeta_prime_direct(Z2, 2, 0).value
        b = zeta_prime_direct(Z2, 2, 1e-6).value
        # derivative in q is -s ζ'(s+1), so the change is at most 2 s 1e-6 ζ'
        assert 0 < a - b <= 2 * 2 * 1e-6 * a


class TestInvariance:
    def test_orthogonal_invariance(self):
        rng = np.random.default_rng(0)
        L = fcc_lattice()
        R = apply_transform(L, orthogonal_matrix(3, rng))
        for f in (
            lambda M: theta(M, 0.7).value,
            lambda M: zeta_prime_direct(M, 2.0, 0.3).value,
            lambda M: zeta_q_psf(M, 2.0, 1.0).value,
        ):
            assert f(R) == pytest.approx(f(L), rel=1e-10)

    def test_monotone_in_q_and_s(self):
        L = hexagonal_lattice()
        vals_q = [zeta_prime_direct(L, 2.0, q).value for q in (0, 0.5, 1, 2)]
        vals_s = [zeta_prime_direct(L, s, 0.5).value for s in (1.5, 2, 3, 5)]
        assert all(np.diff(vals_q) < 0) and all(np.diff(vals_s) < 0)


def test_tail_bound_is_an_upper_bound():
    L = hexagonal_lattice()
    counter = count_bound(L)
    g = lambda r: math.exp(-r * r)  # noqa: E731
    from latzeta.lattice import enumerate_vectors

    R = 2.0
    inside = enumerate_vectors(L, R)
    far = enumerate_vectors(L, 8.0)
    true_tail = float(np.sum(np.exp(-far.norm_sq[far.norm_sq > R * R * (1 + 1e-12)])))
    assert true_tail <= tail_bound(g, R, counter, len(inside) + 1)


def test_eval_request_validation():
    EvalRequest(s=2, q=0, tau=1, rel_tol=1e-3)
    for kw in ({"q": -1}, {"tau": 0}, {"rel_tol": 0.5}):
        with pytest.raises(DomainError):
            EvalRequest(**kw)
