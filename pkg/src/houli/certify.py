"""Computer-assisted positivity proof for the damping quadratic form.

``F(a, c) >= 0`` follows from two checks:

* the truncation ``F^(N)`` (a symmetric 2N x 2N matrix) has smallest
  eigenvalue above ``2/N``, certified by an approximate eigendecomposition
  plus an interval bound on the residual;
* the remainder ``F - F_N`` is bounded below by ``-(2/N)`` on the head block
  and ``delta - 3/N`` on the tail block, certified by interval evaluation of
  the coefficient groups of the term-by-term estimate.

Matrix index order is ``a_1..a_N, c_1..c_N``.  A cross term ``2 x y coef`` is
stored as ``M[x, y] = M[y, x] = coef``.
"""

from __future__ import annotations

import hashlib
import platform
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .interval import ROUNDING_METHOD, Interval, gram_enclosure

__all__ = [
    "FMatrix",
    "EigenCheck",
    "TailCheck",
    "Certificate",
    "build_F_matrix",
    "certify_min_eigenvalue",
    "tail_bound_check",
    "full_certificate",
    "default_shift",
    "write_certificate",
]

PAPER_DELTA = 0.84


def _one() -> Interval:
    return Interval(1.0)


@dataclass(frozen=True)
class FMatrix:
    N: int
    delta: float
    entries: Interval  # shape (2N, 2N)

    @property
    def mid(self) -> np.ndarray:
        return self.entries.mid

    def a(self, k: int) -> int:
        return k - 1

    def c(self, k: int) -> int:
        return self.N + k - 1

    def coefficient_table_sha256(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.entries.lo).tobytes())
        h.update(np.ascontiguousarray(self.entries.hi).tobytes())
        return h.hexdigest()

    def quadratic_enclosure(self, v) -> Interval:
        """Enclosure of ``v' M v`` for a float vector ``v``."""
        v = np.asarray(v, dtype=float)
        outer = Interval(np.outer(v, v))  # not exact, widen below
        outer = Interval(np.nextafter(outer.lo, -np.inf), np.nextafter(outer.hi, np.inf))
        return (self.entries * outer).sum()


def _set_sym(lo, hi, i, j, val: Interval):
    lo[i, j] = val.lo
    hi[i, j] = val.hi
    lo[j, i] = val.lo
    hi[j, i] = val.hi


def build_F_matrix(N: int, delta: float = PAPER_DELTA) -> FMatrix:
    """Interval matrix of the truncated quadratic form ``F_N``."""
    if N < 3:
        raise ValueError("N must be at least 3")
    one = _one()
    d = Interval(float(delta)) if float(delta) == delta else Interval(delta)
    lo = np.zeros((2 * N, 2 * N))
    hi = np.zeros((2 * N, 2 * N))
    kf = np.arange(1, N + 1, dtype=float)
    K = Interval(kf)
    ia = np.arange(N)
    ic = N + np.arange(N)

    # a_k^2 (delta + 1/k^2 - 1/(k-1)^2), last term dropped at k = 1
    diag_a = d + one / K.sqr()
    km1 = Interval(kf[1:] - 1.0)
    tail = diag_a[1:] - one / km1.sqr()
    diag_a = Interval(np.concatenate([diag_a.lo[:1], tail.lo]), np.concatenate([diag_a.hi[:1], tail.hi]))
    _set_sym(lo, hi, ia, ia, diag_a)

    # c_k^2 (delta + 1/(k(k+1)))
    _set_sym(lo, hi, ic, ic, d + one / (K * (K + 1.0)))

    # 2 a_k a_{k+1} / (k+1)^2
    k = K[:-1]
    _set_sym(lo, hi, ia[:-1], ia[1:], one / (k + 1.0).sqr())

    # 2 a_k a_j (1/j^2 - 1/(j-1)^2), j > k+1
    J = Interval(kf[2:])
    g = one / J.sqr() - one / (J - 1.0).sqr()  # indexed by j = 3..N
    for kk in range(1, N - 1):
        js = np.arange(kk + 2, N + 1)
        _set_sym(lo, hi, np.full(js.size, kk - 1), js - 1, g[js - 3])

    # 2 a_k c_k (1 + 2k - k^2) / (2 k^2 (k+1))
    num = (one + 2.0 * K) - K.sqr()
    _set_sym(lo, hi, ia, ic, num / (2.0 * K.sqr() * (K + 1.0)))

    # 2 a_{k+1} c_k (k^2 - k - 1) / (2 k^2 (k+1)^2), k = 1..N-1
    k = K[:-1]
    num = (k.sqr() - k) - 1.0
    _set_sym(lo, hi, ia[1:], ic[:-1], num / (2.0 * k.sqr() * (k + 1.0).sqr()))

    # -2 a_{k+2} c_k (k+2) / (2 (k+1)^2), k = 1..N-2
    k = K[:-2]
    _set_sym(lo, hi, ia[2:], ic[:-2], -((k + 2.0) / (2.0 * (k + 1.0).sqr())))

    # 2 a_k c_j / (j (j+1)), j > k
    h = one / (K * (K + 1.0))  # indexed by j = 1..N
    for kk in range(1, N):
        js = np.arange(kk + 1, N + 1)
        _set_sym(lo, hi, np.full(js.size, kk - 1), N + js - 1, h[js - 1])

    return FMatrix(N=N, delta=float(delta), entries=Interval(lo, hi))


# -- eigenvalue certificate ---------------------------------------------------

@dataclass(frozen=True)
class EigenCheck:
    sigma: float
    margin: float
    certified: bool
    min_D: float
    residual_max_entry: float  # rigorous upper bound on max |M - sigma I - W W'|
    residual_norm_bound: float  # rigorous 2N * residual_max_entry
    lambda_min_lower: float  # rigorous sigma - ||R||, exceeds sigma - margin when certified
    approx_lambda_min: float
    reason: str
    seconds: float


def certify_min_eigenvalue(M: FMatrix | Interval | np.ndarray, sigma: float, margin: float) -> EigenCheck:
    """Certify ``lambda_min(M) > sigma - margin``.

    The approximate factorization ``mid(M) - sigma I ~ V D V'`` is realized as
    ``W W'`` with ``W = V sqrt(D)`` rounded to floats.  ``W W'`` is positive
    semidefinite for every real ``W``, so only the residual
    ``R = M - sigma I - W W'`` needs a rigorous bound: ``||R||_2 <= ||R||_1 <= n
    max|R_ij|`` for symmetric ``R``.  If ``n max|R_ij| < margin`` then
    ``M - (sigma - margin) I = W W' + (margin I + R)`` is positive definite.
    """
    t0 = time.perf_counter()
    if not sigma > margin > 0:
        raise ValueError("need sigma > margin > 0")
    if isinstance(M, FMatrix):
        ent = M.entries
    elif isinstance(M, Interval):
        ent = M
    else:
        ent = Interval(np.asarray(M, dtype=float))
    n = ent.shape[0]
    mid = ent.mid
    mid = 0.5 * (mid + mid.T)
    D, V = np.linalg.eigh(mid - sigma * np.eye(n))
    approx_min = float(D[0] + sigma)
    min_D = float(D.min())

    def result(ok, rmax, rnorm, reason):
        return EigenCheck(
            sigma=sigma,
            margin=margin,
            certified=ok,
            min_D=min_D,
            residual_max_entry=rmax,
            residual_norm_bound=rnorm,
            lambda_min_lower=float((Interval(sigma) - Interval(rnorm)).lo) if ok else float("nan"),
            approx_lambda_min=approx_min,
            reason=reason,
            seconds=time.perf_counter() - t0,
        )

    if not np.all(D > 0):
        return result(False, float("nan"), float("nan"), f"D has non-positive entries (min {min_D:.6g})")

    W = V * np.sqrt(D)
    P = gram_enclosure(W)
    sig = Interval(float(sigma))
    shifted_diag = Interval(np.diag(ent.lo), np.diag(ent.hi)) - sig
    lo = ent.lo.copy()
    hi = ent.hi.copy()
    idx = np.arange(n)
    lo[idx, idx] = shifted_diag.lo
    hi[idx, idx] = shifted_diag.hi
    R = Interval(lo, hi) - P
    rmax = float(np.max(R.mag()))
    rnorm = float((Interval(float(n)) * Interval(rmax)).hi)
    ok = rnorm < margin
    reason = "residual bound below margin" if ok else f"residual bound {rnorm:.3g} not below margin {margin:.3g}"
    return result(ok, rmax, rnorm, reason)


# -- tail estimate ----------------------------------------------------------

@dataclass(frozen=True)
class TailCheck:
    N: int
    delta: float
    certified: bool
    head_bound: float  # claimed lower bound -2/N (rounded down)
    tail_bound: float  # claimed lower bound delta - 3/N (rounded down)
    groups: dict = field(default_factory=dict)  # name -> (lo, hi) of the rigorous lower value
    reason: str = ""


def _bracket_a(N: Interval) -> Interval:
    one = _one()
    return (
        -(3.0 / N.sqr())
        - N * (one / N.sqr() - one / (N + 1.0).sqr())
        - _bracket_common(N)
    )


def _bracket_common(N: Interval) -> Interval:
    one = _one()
    return (
        ((N.sqr() - N) - 1.0) / (2.0 * N.sqr() * (N + 1.0).sqr())
        + (N + 1.0) / (2.0 * N.sqr())
        + ((N.sqr() - 2.0 * N) - 1.0) / (2.0 * N.sqr() * (N + 1.0))
        + one / (N + 2.0)
    )


def tail_bound_check(N: int, delta: float = PAPER_DELTA) -> TailCheck:
    """Interval check of every coefficient group in the remainder estimate.

    Head block (k <= N): ``a_k^2`` carries ``-2/N^2 - 1/(N+1)`` and ``c_k^2``
    (k = N-1, N) carries ``-(N^2-N-1)/(2N^2(N+1)^2) - (N+1)/(2N^2)``; both must
    be at least ``-2/N``.  Tail block (k > N): the diagonal coefficient plus
    its bracket must be at least ``delta - 3/N`` for every k > N.  The
    k-dependent parts ``1/k^2 - 1/(k-1)^2`` and ``1/(k(k+1))`` are bounded by
    evaluation at ``k = N+1``, an interval check that their discrete
    difference keeps one sign on ``[N+1, 4N]``, and an explicit envelope for
    ``k > 4N``.
    """
    one = _one()
    n = Interval(float(N))
    d = Interval(float(delta))
    head_claim = -(2.0 / n)
    tail_claim = d - 3.0 / n
    groups = {}
    failures = []

    if not tail_claim.lo > 0:
        failures.append("delta - 3/N is not positive")

    head_a = -(2.0 / n.sqr()) - one / (n + 1.0)
    head_c = -(((n.sqr() - n) - 1.0) / (2.0 * n.sqr() * (n + 1.0).sqr())) - (n + 1.0) / (2.0 * n.sqr())
    groups["head a_k^2"] = head_a
    groups["head c_k^2 (k=N-1,N)"] = head_c
    for name, g in (("head a_k^2", head_a), ("head c_k^2 (k=N-1,N)", head_c)):
        if not g >= head_claim:
            failures.append(f"{name} below -2/N")

    # k-dependent diagonal parts on the tail
    ks = Interval(np.arange(N + 1, 4 * N + 1, dtype=float))
    ga = one / ks.sqr() - one / (ks - 1.0).sqr()  # negative, increasing to 0
    gc = one / (ks * (ks + 1.0))  # positive, decreasing to 0
    inc_a = bool(np.all(ga[1:].lo >= ga[:-1].hi))
    dec_c = bool(np.all(gc[1:].hi <= gc[:-1].lo))
    if not inc_a:
        failures.append("1/k^2 - 1/(k-1)^2 not increasing on [N+1, 4N]")
    if not dec_c:
        failures.append("1/(k(k+1)) not decreasing on [N+1, 4N]")
    # for k > 4N: |1/k^2 - 1/(k-1)^2| = (2k-1)/(k^2(k-1)^2) <= 2/(k(k-1)^2)
    K4 = Interval(float(4 * N))
    env_a = -(2.0 / (K4 * (K4 - 1.0).sqr()))
    min_ga = Interval(min(float(ga[0].lo), float(env_a.lo)))
    min_gc = Interval(0.0)  # 1/(k(k+1)) > 0 for every k

    tail_a = (d + min_ga) + _bracket_a(n)
    tail_c = (d + min_gc) - _bracket_common(n)
    groups["tail a_k^2"] = tail_a
    groups["tail c_k^2"] = tail_c
    for name, g in (("tail a_k^2", tail_a), ("tail c_k^2", tail_c)):
        if not g >= tail_claim:
            failures.append(f"{name} below delta - 3/N")

    return TailCheck(
        N=N,
        delta=float(delta),
        certified=not failures,
        head_bound=float(head_claim.lo),
        tail_bound=float(tail_claim.lo),
        groups={k: (float(v.lo), float(v.hi)) for k, v in groups.items()},
        reason="; ".join(failures) if failures else "all coefficient groups dominate their bounds",
    )


# -- combined certificate -------------------------------------------------------

def default_shift(N: int, margin: float | None = None) -> tuple[float, float]:
    """Shift and margin with ``sigma - margin = 2/N``.

    The margin defaults to ``0.2/N`` (0.001 at N = 200, giving sigma = 0.011).
    """
    m = 0.2 / N if margin is None else float(margin)
    return 2.0 / N + m, m


@dataclass(frozen=True)
class Certificate:
    N: int
    delta: float
    sigma: float
    margin: float
    eigen: EigenCheck
    tail: TailCheck
    coefficient_sha256: str
    expected_sha256: str
    verdict: str
    lambda_required: float  # rigorous enclosure hi of 2/N
    fingerprint: dict
    seconds: float
    matrix: FMatrix | None = field(default=None, repr=False, compare=False)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"


def _fingerprint() -> dict:
    return {
        "rounding": ROUNDING_METHOD,
        "matmul_bound": "a-priori |fl(AB)-AB| <= (2p+4)u|A||B| + (p+2)eta",
        "psd_factor": "W W' with W = V sqrt(D) in binary64",
        "numpy": np.__version__,
        "python": platform.python_version(),
        "machine": platform.machine(),
        "float_epsilon": float(np.finfo(float).eps).hex(),
    }


def full_certificate(
    N: int = 200,
    delta: float = PAPER_DELTA,
    sigma: float | None = None,
    margin: float | None = None,
    tamper: bool = False,
) -> Certificate:
    """Certify ``F(a, c) >= 0`` at truncation ``N``.

    ``tamper`` perturbs one coefficient after the reference hash is taken; it
    exists to exercise the integrity check.
    """
    t0 = time.perf_counter()
    M = build_F_matrix(N, delta)
    expected = M.coefficient_table_sha256()
    if tamper:
        lo = M.entries.lo.copy()
        hi = M.entries.hi.copy()
        lo[0, 0] += 1.0
        hi[0, 0] += 1.0
        M = replace(M, entries=Interval(lo, hi))
    sha = M.coefficient_table_sha256()
    s_def, m_def = default_shift(N, margin)
    sigma = s_def if sigma is None else float(sigma)
    margin = m_def if margin is None else float(margin)
    eig = certify_min_eigenvalue(M, sigma, margin)
    tail = tail_bound_check(N, delta)
    required = (Interval(2.0) / Interval(float(N))).hi
    reasons = []
    if sha != expected:
        reasons.append("coefficient table SHA-256 mismatch")
    if not eig.certified:
        reasons.append("eigenvalue: " + eig.reason)
    if eig.certified and not eig.lambda_min_lower > float(required):
        reasons.append("certified eigenvalue bound does not exceed 2/N")
    if not tail.certified:
        reasons.append("tail: " + tail.reason)
    verdict = "certified" if not reasons else "not certified: " + "; ".join(reasons)
    return Certificate(
        N=N,
        delta=float(delta),
        sigma=sigma,
        margin=margin,
        eigen=eig,
        tail=tail,
        coefficient_sha256=sha,
        expected_sha256=expected,
        verdict=verdict,
        lambda_required=float(required),
        fingerprint=_fingerprint(),
        seconds=time.perf_counter() - t0,
        matrix=M,
    )


def _hex(x: float) -> str:
    return float(x).hex()


def certificate_text(cert: Certificate) -> str:
    e, t = cert.eigen, cert.tail
    M = cert.matrix
    lines = ["[matrix]"]
    lines.append(f"N = {cert.N}")
    lines.append(f"dimension = {2 * cert.N}")
    lines.append(f"delta = {_hex(cert.delta)}")
    lines.append("index_order = a_1..a_N, c_1..c_N")
    lines.append(f"coefficient_sha256 = {cert.coefficient_sha256}")
    lines.append(f"expected_sha256 = {cert.expected_sha256}")
    if M is not None:
        for name, i in (("a1_a1", (M.a(1), M.a(1))), ("c1_c1", (M.c(1), M.c(1))), ("a1_c1", (M.a(1), M.c(1)))):
            lines.append(f"entry_{name} = [{_hex(M.entries.lo[i])}, {_hex(M.entries.hi[i])}]")
        lines.append(f"max_entry_width = {_hex(float(np.max(M.entries.width)))}")
    lines.append("")
    lines.append("[eigenvalue]")
    lines.append(f"sigma = {_hex(e.sigma)}")
    lines.append(f"margin = {_hex(e.margin)}")
    lines.append(f"approx_lambda_min = {e.approx_lambda_min!r}")
    lines.append(f"min_D = {_hex(e.min_D)}")
    lines.append(f"residual_max_entry_upper = {_hex(e.residual_max_entry)}")
    lines.append(f"residual_norm_upper = {_hex(e.residual_norm_bound)}")
    lines.append("residual_norm_rule = dimension * max_entry (1-norm of a symmetric matrix)")
    lines.append("note = the dimension factor is 2N; a factor of N understates the 1-norm bound")
    lines.append(f"lambda_min_lower = {_hex(e.lambda_min_lower)}")
    lines.append(f"required_lower = {_hex(cert.lambda_required)}")
    lines.append(f"eigen_status = {'certified' if e.certified else 'not certified'}")
    lines.append(f"eigen_reason = {e.reason}")
    lines.append("")
    lines.append("[tail]")
    lines.append(f"head_bound = {_hex(t.head_bound)}")
    lines.append(f"tail_bound = {_hex(t.tail_bound)}")
    for name, (lo, hi) in t.groups.items():
        lines.append(f"group {name} = [{_hex(lo)}, {_hex(hi)}]")
    lines.append(f"tail_status = {'certified' if t.certified else 'not certified'}")
    lines.append(f"tail_reason = {t.reason}")
    lines.append("")
    lines.append("[verdict]")
    lines.append(f"verdict = {cert.verdict}")
    lines.append(f"seconds = {cert.seconds:.3f}")
    for k, v in cert.fingerprint.items():
        lines.append(f"env_{k} = {v}")
    return "\n".join(lines) + "\n"


def write_certificate(cert: Certificate, directory: str | Path = ".") -> Path:
    path = Path(directory) / f"certificate-{cert.N}.txt"
    path.write_text(certificate_text(cert))
    return path
