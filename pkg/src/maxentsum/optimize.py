"""Numerical maximization of H(S_n) over products of probability simplices.

The driver is cyclic block ascent: H(S_n) is concave in each block separately
(entropy is concave in the sum law, which is affine in any one block), so each
block is solved by a monotone exponentiated-gradient update with backtracking.
Multistart over seeded Dirichlet initializations, plus the conjectured
construction as an extra start, probes the non-concave joint landscape.  A
brute-force grid oracle provides an independent lower estimate of the maximum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .bounds import _check_nr, conjectured_inputs, entropy_lower_bound
from .errors import BudgetExceededError, DomainError, MaxentsumError
from .parallel import ordered_map
from .pmf import LOG2E, ZERO_FLOOR, Pmf, _entropy_bits, _finalize, as_pmf

#: Hard cap on ordered grid tuples enumerated by the grid oracle.
GRID_BUDGET = 100_000_000

_MAX_INNER = 400
_ETA_MAX = 1e6
_ETA_MIN = 1e-14
_STEP_RULES = ("backtracking", "fixed")


@dataclass(frozen=True)
class OptimizerConfig:
    starts: int = 64
    seed: int = 0
    max_outer_sweeps: int = 10_000
    inner_tol: float = 1e-10
    outer_tol: float = 1e-12
    include_conjectured_start: bool = True
    step_rule: str = "backtracking"

    def __post_init__(self):
        if self.starts < 1:
            raise DomainError("need at least one start")
        if self.max_outer_sweeps < 1:
            raise DomainError("need at least one sweep")
        if not (self.inner_tol > 0.0 and self.outer_tol > 0.0):
            raise DomainError("tolerances must be positive")
        if self.step_rule not in _STEP_RULES:
            raise DomainError(f"step_rule must be one of {_STEP_RULES}")


@dataclass(frozen=True)
class StartRecord:
    start_id: int
    value: float
    sweeps: int
    converged: bool


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    best_inputs: tuple[Pmf, ...]
    best_value: float
    per_start: tuple[StartRecord, ...]
    gap_to_bound: float

    def __post_init__(self):
        recomputed = _entropy_bits(_fold([p.probs for p in self.best_inputs]))
        if abs(recomputed - self.best_value) > 1e-12:
            raise MaxentsumError("best_value is inconsistent with best_inputs")
        if any(rec.value > self.best_value for rec in self.per_start):
            raise MaxentsumError("a per-start value exceeds best_value")

    def converged_fraction(self) -> float:
        return sum(rec.converged for rec in self.per_start) / len(self.per_start)

    def distinct_local_values(self, tol: float = 1e-8) -> list[float]:
        """Cluster the per-start final values; exploratory landscape output."""
        distinct: list[float] = []
        for value in sorted(rec.value for rec in self.per_start):
            if not distinct or value - distinct[-1] > tol:
                distinct.append(value)
        return distinct

    def as_dict(self) -> dict:
        return {
            "best_inputs": [[float(x) for x in p.probs] for p in self.best_inputs],
            "best_value": float(self.best_value),
            "gap_to_bound": float(self.gap_to_bound),
            "per_start": [asdict(rec) for rec in self.per_start],
        }


def _fold(blocks: list[np.ndarray]) -> np.ndarray:
    acc = blocks[0]
    for b in blocks[1:]:
        acc = np.convolve(acc, b)
    return acc


def _rest_conv(blocks: list[np.ndarray], i: int) -> np.ndarray:
    rest = np.ones(1)
    for j, b in enumerate(blocks):
        if j != i:
            rest = np.convolve(rest, b)
    return rest


def _gradient(rest: np.ndarray, sum_probs: np.ndarray) -> np.ndarray:
    # d H / d p_a = -sum_s rest[s - a] (log2 P(s) + log2 e); logs clamped at
    # the zero floor, which feasible directions never probe from interior points.
    terms = np.log2(np.maximum(sum_probs, ZERO_FLOOR)) + LOG2E
    return -np.correlate(terms, rest, mode="valid")


def _coerce_inputs(inputs) -> list[Pmf]:
    pmfs = [as_pmf(p) for p in inputs]
    if not pmfs:
        raise DomainError("need at least one input block")
    r = pmfs[0].m
    if any(p.m != r for p in pmfs):
        raise DomainError("input blocks must share a common alphabet")
    return pmfs


def objective_gradient(inputs, i: int) -> np.ndarray:
    """Gradient of H(S_n) with respect to the masses of block ``i``."""
    pmfs = _coerce_inputs(inputs)
    if not 0 <= i < len(pmfs):
        raise DomainError(f"block index {i} out of range for {len(pmfs)} blocks")
    blocks = [p.probs for p in pmfs]
    rest = _rest_conv(blocks, i)
    return _gradient(rest, np.convolve(blocks[i], rest))


def _ascend_block(
    blocks: list[np.ndarray], i: int, config: OptimizerConfig, support: np.ndarray | None
) -> tuple[np.ndarray, float, bool]:
    """Monotone concave ascent of block ``i``; returns (block, value, converged)."""
    p = blocks[i]
    rest = _rest_conv(blocks, i)
    sum_probs = np.convolve(p, rest)
    value = _entropy_bits(sum_probs)
    free = slice(None) if support is None else support
    eta = 1.0
    for _ in range(_MAX_INNER):
        grad = _gradient(rest, sum_probs)[free]
        mass = p[free]
        gap = float(grad.max() - grad @ mass)
        if gap <= config.inner_tol:
            return p, value, True
        if config.step_rule == "backtracking":
            eta = min(eta * 2.0, _ETA_MAX)
        else:
            eta = 1.0
        candidate = None
        while eta >= _ETA_MIN:
            stepped = mass * np.exp(eta * (grad - grad.max()))
            stepped /= stepped.sum()
            q = p.copy() if support is not None else stepped
            if support is not None:
                q[free] = stepped
            new_sum = np.convolve(q, rest)
            new_value = _entropy_bits(new_sum)
            if new_value >= value:
                candidate = (q, new_sum, new_value)
                break
            if config.step_rule == "fixed":
                break
            eta *= 0.5
        if candidate is None:
            return p, value, False
        improved = candidate[2] > value
        p, sum_probs, value = candidate
        if not improved:
            # Progress below float resolution: a fixed point for our purposes.
            return p, value, True
    return p, value, False


def _run_start(
    start_blocks: list[np.ndarray],
    config: OptimizerConfig,
    supports: list[np.ndarray | None],
) -> tuple[list[np.ndarray], float, int, bool]:
    blocks = [b.copy() for b in start_blocks]
    value = _entropy_bits(_fold(blocks))
    previous = -math.inf
    converged = False
    sweeps = 0
    for sweeps in range(1, config.max_outer_sweeps + 1):
        for i in range(len(blocks)):
            blocks[i], value, _ = _ascend_block(blocks, i, config, supports[i])
        if value - previous < config.outer_tol:
            converged = True
            break
        previous = value
    return blocks, value, sweeps, converged


def block_ascend(inputs, i: int, config: OptimizerConfig | None = None) -> Pmf:
    """Ascend block ``i`` with the other blocks held fixed.

    The returned block never lowers the objective and satisfies first-order
    simplex stationarity within ``config.inner_tol`` unless the inner budget
    runs out first.
    """
    config = config or OptimizerConfig()
    pmfs = _coerce_inputs(inputs)
    if not 0 <= i < len(pmfs):
        raise DomainError(f"block index {i} out of range for {len(pmfs)} blocks")
    blocks = [p.probs.copy() for p in pmfs]
    new_block, _, _ = _ascend_block(blocks, i, config, None)
    return _finalize(new_block, "block_ascend")


def _start_rng(seed: int, start_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(start_id,)))


def _random_start(n: int, r: int, supports, seed: int, start_id: int) -> list[np.ndarray]:
    rng = _start_rng(seed, start_id)
    blocks = []
    for i in range(n):
        block = np.zeros(r + 1)
        free = np.arange(r + 1) if supports[i] is None else supports[i]
        block[free] = rng.dirichlet(np.ones(free.size))
        blocks.append(block)
    return blocks


def _conjectured_start(n: int, r: int, supports) -> list[np.ndarray]:
    base = [p.probs.copy() for p in conjectured_inputs(n, r)]
    # The mixture block carries interior mass, so it must sit on a
    # full-support slot; block 0 always is one.  The objective is symmetric
    # under block permutation, so the value is unchanged.
    base = [base[-1]] + base[:-1]
    for i, block in enumerate(base):
        free = np.arange(r + 1) if supports[i] is None else supports[i]
        block[free] += 1e-12  # lift boundary zeros so log terms stay finite
        block[free] /= block[free].sum()
    return base


def _maximize(n: int, r: int, supports, config: OptimizerConfig) -> OptimizationResult:
    start_ids = list(range(config.starts))
    if config.include_conjectured_start:
        start_ids.append(config.starts)  # the extra deterministic start

    def run(start_id: int) -> tuple[int, list[np.ndarray], float, int, bool]:
        if config.include_conjectured_start and start_id == config.starts:
            blocks0 = _conjectured_start(n, r, supports)
        else:
            blocks0 = _random_start(n, r, supports, config.seed, start_id)
        blocks, value, sweeps, converged = _run_start(blocks0, config, supports)
        return start_id, blocks, value, sweeps, converged

    outcomes = ordered_map(run, start_ids)
    records = tuple(
        StartRecord(start_id=sid, value=val, sweeps=sw, converged=conv)
        for sid, _, val, sw, conv in outcomes
    )
    _, best_blocks, best_value, _, _ = max(outcomes, key=lambda o: (o[2], -o[0]))
    bound = entropy_lower_bound(n, r).bound_bits
    return OptimizationResult(
        best_inputs=tuple(_finalize(b, "optimizer block") for b in best_blocks),
        best_value=best_value,
        per_start=records,
        gap_to_bound=best_value - bound,
    )


def multistart_maximize(n: int, r: int, config: OptimizerConfig | None = None) -> OptimizationResult:
    """Maximize H(S_n) over all n-tuples of pmfs on {0, ..., r}.

    Deterministic given (config.seed, n, r): every start derives its own
    generator from the seed and its start index, and the reduction is ordered
    with ties broken toward the lowest start id.
    """
    _check_nr(n, r)
    config = config or OptimizerConfig()
    return _maximize(n, r, [None] * n, config)


def restricted_maximize(
    n: int, r: int, ell: int, config: OptimizerConfig | None = None
) -> OptimizationResult:
    """Maximize H(S_n) with blocks ell+1, ..., n confined to the support {0, r}."""
    _check_nr(n, r)
    if int(ell) != ell or not 1 <= ell <= n:
        raise DomainError(f"need 1 <= ell <= n, got ell = {ell!r}")
    two_point = np.array([0, r])
    supports = [None if i < ell else two_point for i in range(n)]
    config = config or OptimizerConfig()
    return _maximize(n, r, supports, config)


def _grid_pmfs(resolution: int, r: int) -> np.ndarray:
    rows: list[list[int]] = []

    def extend(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            rows.append(prefix + [remaining])
            return
        for v in range(remaining + 1):
            extend(prefix + [v], remaining - v, slots - 1)

    extend([], resolution, r + 1)
    return np.asarray(rows, dtype=float) / resolution


def _batch_convolve(fixed: np.ndarray, batch: np.ndarray) -> np.ndarray:
    out = np.zeros((batch.shape[0], fixed.size + batch.shape[1] - 1))
    for k in range(fixed.size):
        out[:, k : k + batch.shape[1]] += fixed[k] * batch
    return out


def _batch_entropy_max(batch: np.ndarray) -> float:
    logs = np.log2(np.maximum(batch, ZERO_FLOOR))
    return float((-(batch * logs).sum(axis=1)).max())


def grid_oracle(n: int, r: int, resolution: int) -> float:
    """Exhaustive maximum of H(S_n) over rational grid pmfs (masses = k/K).

    Always a lower estimate of the true maximum, and nondecreasing along
    refinements K -> c*K (whose grids are nested).  Raises
    :class:`BudgetExceededError` when the ordered tuple count C(K+r, r)^n
    would exceed ``GRID_BUDGET``.
    """
    _check_nr(n, r)
    if int(resolution) != resolution or resolution < 1:
        raise DomainError(f"resolution must be an integer >= 1, got {resolution!r}")
    grid_size = math.comb(resolution + r, r)
    total = grid_size**n
    if total > GRID_BUDGET:
        raise BudgetExceededError(
            f"grid oracle needs {grid_size}^{n} = {total} objective evaluations, "
            f"over the budget of {GRID_BUDGET}"
        )
    grid = _grid_pmfs(resolution, r)
    if n == 1:
        return _batch_entropy_max(grid)
    # The objective is permutation symmetric, so sorted index tuples suffice;
    # the last block is evaluated vectorized.
    best = -math.inf
    for head in itertools.combinations_with_replacement(range(grid_size), n - 1):
        partial = grid[head[0]]
        for idx in head[1:]:
            partial = np.convolve(partial, grid[idx])
        sums = _batch_convolve(partial, grid[head[-1] :])
        best = max(best, _batch_entropy_max(sums))
    return best
