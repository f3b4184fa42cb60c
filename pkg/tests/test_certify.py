import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from houli.certify import (
    build_F_matrix,
    certificate_text,
    certify_min_eigenvalue,
    full_certificate,
    tail_bound_check,
    write_certificate,
)
from houli.interval import Interval
from houli.weighted import F_quadratic


@pytest.fixture(scope="module")
def F200():
    return build_F_matrix(200)


def test_rejects_small_N():
    with pytest.raises(ValueError):
        build_F_matrix(2)


def test_leading_entries(F200):
    E = F200.entries
    assert E[F200.a(1), F200.a(1)].contains(1.84)
    assert E[F200.c(1), F200.c(1)].contains(1.34)
    assert E[F200.a(1), F200.c(1)].contains(0.5)


def test_exact_symmetry(F200):
    E = F200.entries
    assert np.array_equal(E.lo, E.lo.T) and np.array_equal(E.hi, E.hi.T)


def test_quadratic_form_matches_literal(F200):
    # midpoint form against the plain float evaluation (cross block paired as stored)
    rng = np.random.default_rng(0)
    N = F200.N
    for _ in range(100):
        v = rng.standard_normal(2 * N) * (rng.random(2 * N) < 0.1)
        a, c = v[:N], v[N:]
        lit = F_quadratic(np.concatenate([a, [0, 0]]), np.concatenate([c, [0, 0]]))
        # F_quadratic on support <= N includes no terms beyond N
        assert float(v @ F200.mid @ v) == pytest.approx(lit, rel=1e-12, abs=1e-12)


@given(st.integers(0, 2**31))
def test_quadratic_enclosure_contains_float_value(seed):
    M = build_F_matrix(12)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(24)
    enc = M.quadratic_enclosure(v)
    val = F_quadratic(v[:12], v[12:])
    tol = 1e-12 * (1 + abs(val))
    assert float(enc.lo) - tol <= val <= float(enc.hi) + tol


def test_diagonal_matrix_certified():
    cert = certify_min_eigenvalue(2.0 * np.eye(10), 1.0, 0.5)
    assert cert.certified
    assert cert.lambda_min_lower > 0.5


def test_large_shift_not_certified(F200):
    cert = certify_min_eigenvalue(F200, 2.0, 0.5)
    assert not cert.certified
    assert "non-positive" in cert.reason


def test_paper_shift_not_certified_at_200(F200):
    # lambda_min(F^(200)) is about 0.00344, below the 0.01 that the shift needs
    cert = certify_min_eigenvalue(F200, 0.011, 0.001)
    assert not cert.certified
    assert cert.approx_lambda_min == pytest.approx(0.0034405, abs=1e-6)


def test_margin_must_be_below_shift():
    with pytest.raises(ValueError):
        certify_min_eigenvalue(np.eye(3), 0.1, 0.2)


def test_certified_bound_is_rigorous_on_small_case():
    # exact spectrum known: diag(3, 5) rotated
    R = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
    A = R @ np.diag([3.0, 5.0]) @ R.T
    cert = certify_min_eigenvalue(Interval(A), 2.5, 0.25)
    assert cert.certified and 2.25 < cert.lambda_min_lower < 3.0


def test_tail_examples():
    t200 = tail_bound_check(200)
    assert t200.certified
    assert t200.head_bound == pytest.approx(-0.01, abs=1e-15)
    assert t200.tail_bound == pytest.approx(0.825, abs=1e-15)
    assert min(lo for lo, _ in t200.groups.values() if lo > 0.5) >= t200.tail_bound
    t400 = tail_bound_check(400)
    assert t400.certified
    assert t400.head_bound > t200.head_bound and t400.tail_bound > t200.tail_bound
    assert not tail_bound_check(3).certified


def test_full_certificate_large_N(tmp_path):
    cert = full_certificate(700)
    assert cert.certified, cert.verdict
    assert cert.eigen.lambda_min_lower > 2 / 700
    text = certificate_text(cert)
    for section in ("[matrix]", "[eigenvalue]", "[tail]", "[verdict]"):
        assert section in text
    path = write_certificate(cert, tmp_path)
    assert path.name == "certificate-700.txt"
    assert cert.coefficient_sha256 in path.read_text()


def test_tamper_detected():
    cert = full_certificate(50, tamper=True)
    assert not cert.certified
    assert "SHA-256 mismatch" in cert.verdict


def test_N100_is_honest():
    cert = full_certificate(100)
    lam = cert.eigen.approx_lambda_min
    assert cert.certified == (cert.eigen.certified and cert.tail.certified)
    assert lam < 0.02 and not cert.certified


def test_monotone_certification_window():
    # every N below the threshold fails the same way; no N passes then fails
    verdicts = [full_certificate(N).certified for N in (200, 300, 400)]
    assert verdicts == sorted(verdicts)


def test_raising_delta_raises_spectrum():
    lo = np.linalg.eigvalsh(build_F_matrix(60, 0.5).mid)[0]
    hi = np.linalg.eigvalsh(build_F_matrix(60, 0.84).mid)[0]
    assert hi - lo == pytest.approx(0.34, abs=1e-9)
    assert not full_certificate(200, delta=0.5).certified
