"""Log-concavity certificates for residue classes of sum distributions.

Provides the three nested checks (log-concave, ultra-log-concave of order
infinity, ultra-log-concave of finite order), the per-residue-class report
that powers the equality results, the two algebraic identities certifying the
ternary three-summand case, the sign lemma used alongside the odd-class
identity, and the Bernoulli-convolution preservation property.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .pmf import Pmf, PmfLike, as_pmf, residue_decompose, sum_distribution

#: Inequalities pass when their slack is >= -SLACK_COEFF * max(u)^2; margins
#: in reports stay pre-tolerance.
SLACK_COEFF = 1e-12


def _nonneg_array(u) -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] < 1:
        raise DomainError("need a non-empty sequence")
    if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
        raise DomainError("sequence entries must be finite and non-negative")
    return arr


def _slack(arr: np.ndarray) -> np.ndarray | float:
    return SLACK_COEFF * arr.max(axis=-1) ** 2


def log_concavity_margins(u) -> np.ndarray:
    """u_i^2 - u_{i-1} u_{i+1} at each interior index (broadcasts over rows)."""
    arr = _nonneg_array(u)
    return arr[..., 1:-1] ** 2 - arr[..., :-2] * arr[..., 2:]


def ulc_inf_margins(u) -> np.ndarray:
    """i u_i^2 - (i+1) u_{i-1} u_{i+1} at each interior index."""
    arr = _nonneg_array(u)
    i = np.arange(1, arr.shape[-1] - 1, dtype=float)
    return i * arr[..., 1:-1] ** 2 - (i + 1) * arr[..., :-2] * arr[..., 2:]


def ulc_order_margins(u, order: int) -> np.ndarray:
    """i(order-i) u_i^2 - (i+1)(order-i+1) u_{i-1} u_{i+1} at interior indices.

    Requires len(u) <= order + 1; the margins are those of the log-concavity
    of u_i / C(order, i).
    """
    arr = _nonneg_array(u)
    if int(order) != order or order < 0:
        raise DomainError(f"order must be an integer >= 0, got {order!r}")
    if arr.shape[-1] > order + 1:
        raise DomainError(
            f"sequence of length {arr.shape[-1]} cannot be ultra-log-concave "
            f"of order {order} (needs length <= {order + 1})"
        )
    i = np.arange(1, arr.shape[-1] - 1, dtype=float)
    lhs = i * (order - i) * arr[..., 1:-1] ** 2
    rhs = (i + 1) * (order - i + 1) * arr[..., :-2] * arr[..., 2:]
    return lhs - rhs


def _passes(margins: np.ndarray, arr: np.ndarray) -> bool:
    if margins.size == 0:
        return True
    return bool(margins.min() >= -_slack(arr))


def is_log_concave(u) -> bool:
    """Literal check of u_i^2 >= u_{i-1} u_{i+1}, zeros included."""
    arr = _nonneg_array(u)
    if arr.ndim != 1:
        raise DomainError("is_log_concave takes a single sequence")
    return _passes(log_concavity_margins(arr), arr)


def is_ulc_infinite(u) -> bool:
    """True iff (u_i * i!) is log-concave, i.e. i u_i^2 >= (i+1) u_{i-1} u_{i+1}."""
    arr = _nonneg_array(u)
    if arr.ndim != 1:
        raise DomainError("is_ulc_infinite takes a single sequence")
    return _passes(ulc_inf_margins(arr), arr)


def is_ulc_order(u, order: int) -> bool:
    """True iff (u_i / C(order, i)) is log-concave; Binomial(order, p) sits on equality."""
    arr = _nonneg_array(u)
    if arr.ndim != 1:
        raise DomainError("is_ulc_order takes a single sequence")
    return _passes(ulc_order_margins(arr, order), arr)


def has_internal_zeros(u) -> bool:
    """Diagnostic: a zero strictly between the first and last positive masses.

    The checkers treat zeros literally, but an internal zero forces both sides
    of the neighbouring inequalities to 0, so a pass there is vacuous; callers
    can use this flag to tell the two situations apart.
    """
    arr = _nonneg_array(u)
    if arr.ndim != 1:
        raise DomainError("has_internal_zeros takes a single sequence")
    positive = np.flatnonzero(arr > 0.0)
    if positive.size < 2:
        return False
    lo, hi = positive[0], positive[-1]
    return bool(np.any(arr[lo : hi + 1] == 0.0))


@dataclass(frozen=True)
class UlcClassReport:
    """Verdict for one residue class: order tested, first witness, min slack.

    ``margin`` is the pre-tolerance minimum of the inequality slacks, or None
    when the class has no interior index to test (including degenerate
    zero-weight classes, which pass vacuously).
    """

    residue: int
    order: int
    passed: bool
    witness: int | None
    margin: float | None


@dataclass(frozen=True)
class UlcReport:
    r: int
    per_class: tuple[UlcClassReport, ...]

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.per_class)

    def as_dict(self) -> dict:
        return {"r": self.r, "per_class": [asdict(c) for c in self.per_class]}


def conditional_ulc_report(inputs, r: int) -> UlcReport:
    """Test the residue classes of the sum of ``inputs`` mod ``r``.

    Class 0 is tested at order n and classes j != 0 at order n - 1, where n is
    the number of summands.  Zero-weight classes are reported as vacuous
    passes.
    """
    pmfs = [as_pmf(p) for p in inputs]
    n = len(pmfs)
    total = sum_distribution(pmfs)
    dec = residue_decompose(total, r)
    per: list[UlcClassReport] = []
    for j in range(dec.r):
        order = n if j == 0 else n - 1
        if dec.degenerate[j]:
            per.append(UlcClassReport(j, order, True, None, None))
            continue
        u = dec.conditionals[j].probs
        margins = ulc_order_margins(u, order)
        if margins.size == 0:
            per.append(UlcClassReport(j, order, True, None, None))
            continue
        tol = float(_slack(u))
        worst = float(margins.min())
        passed = worst >= -tol
        witness = None if passed else int(np.argmax(margins < -tol)) + 1
        per.append(UlcClassReport(j, order, passed, witness, worst))
    return UlcReport(r=dec.r, per_class=tuple(per))


@dataclass(frozen=True, eq=False)
class TernaryTriple:
    """27 non-negative values indexed by (a1, a2, a3) in {0, 1, 2}^3.

    Product-formed triples carry their three ternary factor pmfs; free-valued
    triples (factors None) are allowed for identity exploration.
    """

    values: np.ndarray
    factors: tuple[Pmf, Pmf, Pmf] | None = None

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float).copy()
        if arr.shape != (3, 3, 3):
            raise DomainError(f"expected shape (3, 3, 3), got {arr.shape}")
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise DomainError("entries must be finite and non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_product(cls, p1: PmfLike, p2: PmfLike, p3: PmfLike) -> "TernaryTriple":
        pmfs = tuple(as_pmf(p) for p in (p1, p2, p3))
        if any(p.m != 2 for p in pmfs):
            raise DomainError("product factors must live on {0, 1, 2}")
        values = np.einsum("i,j,k->ijk", *(p.probs for p in pmfs))
        return cls(values=values, factors=pmfs)

    @classmethod
    def from_values(cls, values) -> "TernaryTriple":
        arr = np.asarray(values, dtype=float)
        if arr.shape == (27,):
            arr = arr.reshape(3, 3, 3)
        return cls(values=arr, factors=None)

    def sum_masses(self) -> np.ndarray:
        """Length-7 vector: mass of the three-fold sum at each total 0..6."""
        return ternary_sum_masses(self.values)


def ternary_sum_masses(values: np.ndarray) -> np.ndarray:
    """Sum-mass assembly for (..., 3, 3, 3) tensors, batched over leading axes."""
    values = np.asarray(values, dtype=float)
    out = np.zeros(values.shape[:-3] + (7,))
    for i, j, k in np.ndindex(3, 3, 3):
        out[..., i + j + k] += values[..., i, j, k]
    return out


@dataclass(frozen=True)
class IdentityGap:
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


def _even_class_expansion(v: np.ndarray) -> np.ndarray:
    x200, x020, x002 = v[..., 2, 0, 0], v[..., 0, 2, 0], v[..., 0, 0, 2]
    x110, x101, x011 = v[..., 1, 1, 0], v[..., 1, 0, 1], v[..., 0, 1, 1]
    squares = (
        (x200 - x020 - x011) ** 2
        + (x020 - x002 - x101) ** 2
        + (x002 - x200 - x110) ** 2
        + x110**2
        + x101**2
        + x011**2
    )
    return (
        0.5 * squares
        + x200 * x110
        + x020 * x011
        + x002 * x101
        + 2.0
        * (
            x200 * x101
            + x020 * x110
            + x002 * x011
            + x110 * x101
            + x110 * x011
            + x101 * x011
        )
    )


def _odd_class_expansion(v: np.ndarray) -> np.ndarray:
    x210, x201, x021 = v[..., 2, 1, 0], v[..., 2, 0, 1], v[..., 0, 2, 1]
    x120, x012, x102 = v[..., 1, 2, 0], v[..., 0, 1, 2], v[..., 1, 0, 2]
    x111 = v[..., 1, 1, 1]
    ring = x210 + x201 + x021 + x120 + x012 + x102
    return (
        (x210 - x012 + x201 - x021 + x120 - x102) ** 2
        - 4.0 * (x201 - x021) * (x120 - x102)
        + x111**2
        + 2.0 * x111 * ring
    )


def identity_gap(which: str, x: TernaryTriple) -> IdentityGap:
    """Direct and expanded evaluations of one certificate quantity.

    ``which = "even"`` targets P(2)^2 - 3 P(0) P(4) of the three-fold sum and
    ``which = "odd"`` targets P(3)^2 - 4 P(1) P(5).  On product-formed input
    the two sides agree identically (and the even expansion is a sum of
    non-negative terms); on free-valued input they may differ, which is the
    point of returning both.
    """
    if not isinstance(x, TernaryTriple):
        x = TernaryTriple.from_values(x)
    s = x.sum_masses()
    if which == "even":
        lhs = s[2] ** 2 - 3.0 * s[0] * s[4]
        rhs = _even_class_expansion(x.values)
    elif which == "odd":
        lhs = s[3] ** 2 - 4.0 * s[1] * s[5]
        rhs = _odd_class_expansion(x.values)
    else:
        raise DomainError(f"unknown identity {which!r}: use 'even' or 'odd'")
    return IdentityGap(lhs=float(lhs), rhs=float(rhs))


def sign_lemma_check(x: TernaryTriple, strictness: float = 1e-9) -> bool:
    """Check the sign implication behind the odd-class certificate.

    For a product-formed triple with strictly positive factors: if
    x201 - x021 and x120 - x102 share a strict sign s, then x210 - x012 has
    sign s as well.  Returns True when the implication holds or is vacuous.
    Sign calls use a deadband of 1e-15 * max(x) to keep float noise from
    manufacturing a strict hypothesis.
    """
    if not isinstance(x, TernaryTriple) or x.factors is None:
        raise PreconditionError("sign lemma needs a product-formed triple")
    if min(float(p.probs.min()) for p in x.factors) <= strictness:
        raise PreconditionError(
            f"factors must be strictly positive (every mass > {strictness})"
        )
    v = x.values
    first = v[2, 0, 1] - v[0, 2, 1]
    second = v[1, 2, 0] - v[1, 0, 2]
    conclusion = v[2, 1, 0] - v[0, 1, 2]
    deadband = 1e-15 * float(v.max())
    if abs(first) <= deadband or abs(second) <= deadband:
        return True
    if (first > 0.0) != (second > 0.0):
        return True
    sign = 1.0 if first > 0.0 else -1.0
    return bool(sign * conclusion > -deadband)


def convolve_bernoulli_preserves(u, order: int, q: float) -> bool:
    """Convolve an order-``order`` ultra-log-concave sequence with (1-q, q).

    The input must already pass :func:`is_ulc_order` at ``order``; the return
    value is the order ``order + 1`` verdict for the convolution, expected to
    be True always.
    """
    arr = _nonneg_array(u)
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"Bernoulli weight must lie in [0, 1], got {q!r}")
    if not is_ulc_order(arr, order):
        raise PreconditionError(f"input sequence is not ultra-log-concave of order {order}")
    conv = np.convolve(arr, np.array([1.0 - q, q]))
    return is_ulc_order(conv, order + 1)


def random_ulc_sequences(
    order: int, count: int, rng: np.random.Generator, rejection_factor: int = 4
) -> np.ndarray:
    """Draw ``count`` ULC(order) probability vectors of length order + 1.

    Rejection from flat Dirichlet draws, topped up by a ratio construction
    (log-concave u_i / C(order, i) built from sorted random ratios) when the
    rejection yield falls short.  Deterministic given the generator state.
    """
    if int(order) != order or order < 1:
        raise DomainError(f"order must be an integer >= 1, got {order!r}")
    if count < 1:
        raise DomainError("count must be >= 1")
    length = order + 1
    draws = rng.dirichlet(np.ones(length), size=rejection_factor * count)
    margins = ulc_order_margins(draws, order)
    ok = margins.min(axis=1) >= -_slack(draws) if margins.size else np.ones(len(draws), bool)
    kept = draws[ok][:count]
    short = count - kept.shape[0]
    if short > 0:
        ratios = np.sort(rng.lognormal(0.0, 1.0, size=(short, order)), axis=1)[:, ::-1]
        base = np.cumprod(np.concatenate([np.ones((short, 1)), ratios], axis=1), axis=1)
        coeffs = np.array([math.comb(order, i) for i in range(length)], dtype=float)
        built = base * coeffs
        built /= built.sum(axis=1, keepdims=True)
        kept = np.vstack([kept, built])
    return kept
