"""Monte Carlo phase-transition harness and finite-n framework estimators.

Every stochastic quantity here is driven by a counter-mode splitmix64
generator: the i-th draw of a stream is a pure function of (seed, i), and
per-task streams are derived by index (:func:`split_stream_seed`), never
shared or advanced across tasks.  That is what makes the reproducibility
contract possible — identical (seed, grid) inputs produce byte-identical
tables regardless of thread count, schedule, or evaluation order.

The harness (:func:`run_phase_grid`) samples Gaussian matrices and sparse
vectors per grid cell, solves basis pursuit, and tabulates success counts;
:func:`estimate_transition` locates the empirical 50% crossing.
:func:`framework_cw` / :func:`framework_alpha_estimate` evaluate, on sorted
Gaussian samples, the water-level index c_w and the critical-measurement
ratio whose large-n limits are the weak-threshold quantities (1 - theta_hat
and alpha_w respectively); the tests confirm both convergences numerically.
"""

from __future__ import annotations

import functools
import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy.optimize import isotonic_regression

from .recovery import _ADMM_MAX_ITERS, BPProblem, check_recovery, solve_bp
from .threshold import Regime

__all__ = [
    "CounterStream",
    "TrialDiagnostics",
    "PhaseGrid",
    "PhaseCell",
    "FrameworkSample",
    "FrameworkResult",
    "splitmix64",
    "split_stream_seed",
    "run_trial",
    "run_phase_grid",
    "estimate_transition",
    "draw_framework_sample",
    "framework_cw",
    "framework_alpha_estimate",
    "run_framework",
]

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB
_TWO_POW_63 = 1 << 63
_INV_2_POW_53 = 2.0 ** -53


def splitmix64(state: int) -> int:
    """The splitmix64 finalizer: one 64-bit avalanche mix of ``state``."""
    z = state & _MASK
    z = ((z ^ (z >> 30)) * _MIX_1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_2) & _MASK
    return (z ^ (z >> 31)) & _MASK


def split_stream_seed(seed: int, *path: int) -> int:
    """Derive a child seed from (seed, path indices), order-independent of use.

    Each path component folds in as mix(state + (index + 1) * golden), so
    split(seed, a, b) depends only on the values, never on when or where the
    child stream is consumed.
    """
    state = int(seed) & _MASK
    for index in path:
        if index < 0:
            raise ValueError(f"path indices must be nonnegative, got {index}")
        state = splitmix64((state + (int(index) + 1) * _GOLDEN) & _MASK)
    return state


class CounterStream:
    """Counter-mode splitmix64 stream: draw i is mix(seed + (i+1) * golden).

    Blocks are generated with vectorized uint64 arithmetic (wraparound is the
    intended mod-2^64 behavior); the scalar path uses plain Python integers.
    Both are bit-identical — the tests cross-check them.
    """

    def __init__(self, seed: int) -> None:
        self._seed = int(seed) & _MASK
        self._index = 0

    @property
    def index(self) -> int:
        return self._index

    def next_u64(self) -> int:
        self._index += 1
        return splitmix64((self._seed + self._index * _GOLDEN) & _MASK)

    def u64_block(self, count: int) -> np.ndarray:
        if count < 0:
            raise ValueError(f"count must be nonnegative, got {count}")
        counters = np.arange(self._index + 1, self._index + count + 1, dtype=np.uint64)
        self._index += count
        z = np.uint64(self._seed) + counters * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_2)
        return z ^ (z >> np.uint64(31))

    def normals(self, count: int) -> np.ndarray:
        """Standard normals via Box-Muller on consecutive u64 pairs.

        Pairs are consumed whole: an odd count still advances the stream by
        an even number of draws and discards the unused second variate.
        """
        if count < 0:
            raise ValueError(f"count must be nonnegative, got {count}")
        if count == 0:
            return np.zeros(0)
        pairs = (count + 1) // 2
        raw = self.u64_block(2 * pairs)
        # 53-bit mantissas; u1 shifted into (0, 1] so log never sees 0.
        u1 = ((raw[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_POW_53
        u2 = (raw[1::2] >> np.uint64(11)).astype(np.float64) * _INV_2_POW_53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = (2.0 * np.pi) * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]

    def integer_below(self, bound: int) -> int:
        """Uniform draw in [0, bound) by modular reduction (bound << 2^64)."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        return self.next_u64() % bound

    def choose_support(self, n: int, k: int) -> tuple[int, ...]:
        """k distinct indices from [0, n) by partial Fisher-Yates, sorted."""
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.integer_below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return tuple(sorted(pool[:k]))

    def sign_draws(self, count: int) -> tuple[int, ...]:
        """count fair signs: +1 when the draw's top bit is 0, else -1."""
        return tuple(1 if self.next_u64() < _TWO_POW_63 else -1 for _ in range(count))


@dataclass
class TrialDiagnostics:
    """Counters a trial loop increments; purely informational."""

    solver_nonconverged: int = 0

    def merge(self, other: "TrialDiagnostics") -> None:
        self.solver_nonconverged += other.solver_nonconverged


def run_trial(
    n: int,
    m: int,
    k: int,
    regime: Regime,
    stream: CounterStream,
    diagnostics: TrialDiagnostics | None = None,
) -> bool:
    """One Monte Carlo trial; True iff basis pursuit recovers the planted x0.

    Stream consumption order is frozen (changing it changes every seeded
    result): (1) the m*n matrix entries, row-major; (2) the support draw;
    (3) the sign draws (general regime only).  The planted vector has unit
    magnitudes — recovery success depends only on the pattern, and fixed
    magnitudes maximize reproducibility.  A solver that fails to converge
    counts as a failed trial and bumps the diagnostics counter.

    The solver is armed with an objective cutoff strictly dominating the
    tolerance band of ``check_recovery``: any point within the acceptance
    band has l1 norm at least ||x0||_1 - n*1e-4, so an optimum certified
    below ||x0||_1 - max(0.05, 2e-4*n) already forces a failed comparison
    and the trial can skip the remaining solver iterations.  Trial outcomes
    are therefore identical with and without the cutoff; only the time spent
    on clearly failing instances changes.
    """
    regime = Regime.coerce(regime)
    if not 1 <= k < m < n:
        raise ValueError(f"need 1 <= k < m < n, got k={k}, m={m}, n={n}")
    a = stream.normals(m * n).reshape(m, n)
    support = stream.choose_support(n, k)
    if regime is Regime.GENERAL:
        signs = stream.sign_draws(k)
    else:
        signs = (1,) * k
    x0 = np.zeros(n)
    x0[list(support)] = np.array(signs, dtype=float)
    y = a @ x0
    cutoff = float(np.abs(x0).sum()) - max(0.05, 2e-4 * n)
    solution = solve_bp(BPProblem(A=a, y=y, regime=regime), objective_cutoff=cutoff)
    if not solution.converged and diagnostics is not None:
        if solution.iterations >= _ADMM_MAX_ITERS:
            diagnostics.solver_nonconverged += 1
    return check_recovery(x0, solution)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_grid_values(name: str, values) -> tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if not values:
        raise ValueError(f"{name} grid must be non-empty")
    for v in values:
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} values must lie in (0, 1), got {v!r}")
    for left, right in zip(values, values[1:]):
        if not left < right:
            raise ValueError(f"{name} grid must be strictly increasing")
    return values


@dataclass(frozen=True)
class PhaseGrid:
    """A Monte Carlo experiment plan over an (alpha, beta) grid."""

    n: int
    alphas: tuple[float, ...]
    betas: tuple[float, ...]
    trials_per_cell: int
    seed: int
    regime: Regime = Regime.GENERAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alphas", _check_grid_values("alpha", self.alphas))
        object.__setattr__(self, "betas", _check_grid_values("beta", self.betas))
        object.__setattr__(self, "trials_per_cell", int(self.trials_per_cell))
        object.__setattr__(self, "seed", int(self.seed) & _MASK)
        object.__setattr__(self, "regime", Regime.coerce(self.regime))
        if self.n < 3:
            raise ValueError(f"n must be at least 3, got {self.n}")
        if self.trials_per_cell < 1:
            raise ValueError(f"trials_per_cell must be >= 1, got {self.trials_per_cell}")


@dataclass(frozen=True)
class PhaseCell:
    """Trial tally for one grid cell."""

    alpha: float
    beta: float
    m: int
    k: int
    trials: int
    successes: int

    def __post_init__(self) -> None:
        if not 1 <= self.k < self.m:
            raise ValueError(f"need 1 <= k < m, got k={self.k}, m={self.m}")
        if not 0 <= self.successes <= self.trials:
            raise ValueError(
                f"successes must lie in [0, trials], got {self.successes}/{self.trials}"
            )

    @property
    def rate(self) -> float:
        return self.successes / self.trials


def _cell_tasks(grid: PhaseGrid) -> list[tuple[int, float, float, int, int]]:
    """Valid cells with their flat index (beta-major, alpha-minor).

    Skipped cells keep their index — the RNG derivation must not depend on
    which other cells are feasible.
    """
    tasks = []
    for bi, beta in enumerate(grid.betas):
        for ai, alpha in enumerate(grid.alphas):
            cell_index = bi * len(grid.alphas) + ai
            m = _round_half_up(alpha * grid.n)
            k = _round_half_up(beta * grid.n)
            if not 1 <= k < m < grid.n:
                print(
                    f"skipping infeasible cell alpha={alpha!r} beta={beta!r}"
                    f" (m={m}, k={k}, n={grid.n})",
                    file=sys.stderr,
                )
                continue
            tasks.append((cell_index, alpha, beta, m, k))
    return tasks


def _run_cell(grid: PhaseGrid, task: tuple[int, float, float, int, int]):
    cell_index, alpha, beta, m, k = task
    diagnostics = TrialDiagnostics()
    successes = 0
    for trial in range(grid.trials_per_cell):
        stream = CounterStream(split_stream_seed(grid.seed, cell_index, trial))
        if run_trial(grid.n, m, k, grid.regime, stream, diagnostics):
            successes += 1
    cell = PhaseCell(
        alpha=alpha,
        beta=beta,
        m=m,
        k=k,
        trials=grid.trials_per_cell,
        successes=successes,
    )
    return cell, diagnostics


def run_phase_grid(
    grid: PhaseGrid,
    threads: int = 1,
    diagnostics: TrialDiagnostics | None = None,
) -> list[PhaseCell]:
    """All feasible cells of the grid, in (beta-major, alpha-minor) order.

    threads=1 runs inline, threads=0 uses every core, threads=N uses a pool
    of N processes.  Cell results are identical in all cases: each trial's
    stream is derived from (seed, cell index, trial index) alone, and the
    pool map preserves task order.
    """
    if threads < 0:
        raise ValueError(f"threads must be >= 0, got {threads}")
    tasks = _cell_tasks(grid)
    worker = functools.partial(_run_cell, grid)
    if threads == 1 or not tasks:
        results = [worker(task) for task in tasks]
    else:
        import multiprocessing

        processes = None if threads == 0 else threads
        with multiprocessing.Pool(processes) as pool:
            results = pool.map(worker, tasks)
    cells = []
    for cell, cell_diag in results:
        cells.append(cell)
        if diagnostics is not None:
            diagnostics.merge(cell_diag)
    return cells


def estimate_transition(cells) -> float:
    """Empirical 50% crossing of the success rate along alpha, for one beta.

    Isotonic regression (trial-weighted, increasing) smooths the raw rates,
    then the crossing is linearly interpolated between the bracketing grid
    points.
    """
    cells = sorted(cells, key=lambda c: c.alpha)
    if len(cells) < 4:
        raise ValueError(f"need at least 4 cells, got {len(cells)}")
    betas = {c.beta for c in cells}
    if len(betas) != 1:
        raise ValueError(f"cells must share a single beta, got {sorted(betas)}")
    alphas = np.array([c.alpha for c in cells])
    if np.unique(alphas).size != alphas.size:
        raise ValueError("cells must have distinct alpha values")
    rates = np.array([c.rate for c in cells])
    weights = np.array([float(c.trials) for c in cells])
    if rates.min() >= 0.3 or rates.max() <= 0.7:
        raise ValueError(
            "success rates must span below 0.3 and above 0.7; widen the alpha grid"
        )
    fitted = np.asarray(isotonic_regression(rates, weights=weights, increasing=True).x)
    above = np.nonzero(fitted >= 0.5)[0]
    if above.size == 0:
        raise ValueError("isotonic fit never reaches 0.5; widen the alpha grid")
    j = int(above[0])
    if j == 0:
        return float(alphas[0])
    f0, f1 = float(fitted[j - 1]), float(fitted[j])
    a0, a1 = float(alphas[j - 1]), float(alphas[j])
    t = (0.5 - f0) / (f1 - f0)
    return a0 + t * (a1 - a0)


@dataclass(frozen=True)
class FrameworkSample:
    """One rearranged Gaussian sample with its water-level quantities.

    ``gbar`` holds the n-k head magnitudes sorted increasingly followed by
    the k raw tail entries; ``c_w`` is the smallest dropped-head count at
    which the residual average S(c)/(n-c) falls below the next head
    magnitude; ``f_value`` is the square root of the remaining energy after
    subtracting the mean term S(c_w)^2/(n-c_w).
    """

    g: np.ndarray
    gbar: np.ndarray
    c_w: int
    f_value: float


def framework_cw(gbar, n: int, k: int) -> int:
    """Water-level index: smallest c in {0..n-k-1} with S(c)/(n-c) <= gbar[c].

    S(c) sums the head magnitudes above the first c minus the raw tail sum.
    Returns n-k-1 when the inequality never holds.  k = 0 (no tail) is
    allowed — the quantity is defined by the head alone then.
    """
    gbar = np.asarray(gbar, dtype=float).ravel()
    n, k = int(n), int(k)
    if gbar.size != n:
        raise ValueError(f"gbar must have length n={n}, got {gbar.size}")
    if not 0 <= k < n:
        raise ValueError(f"need 0 <= k < n, got k={k}, n={n}")
    head = gbar[: n - k]
    if head.size and (float(head.min()) < 0.0 or np.any(np.diff(head) < 0.0)):
        raise ValueError("gbar head must be nonnegative and nondecreasing")
    tail_sum = float(gbar[n - k :].sum())
    prefix = np.concatenate([[0.0], np.cumsum(head)])
    s_values = (prefix[-1] - prefix[:-1]) - tail_sum
    denominators = n - np.arange(n - k)
    satisfied = s_values / denominators <= head
    if not satisfied.any():
        return n - k - 1
    return int(np.argmax(satisfied))


def draw_framework_sample(n: int, k: int, stream: CounterStream) -> FrameworkSample:
    """Sample g, rearrange to gbar, and evaluate (c_w, f_value)."""
    n, k = int(n), int(k)
    if not 0 <= k < n:
        raise ValueError(f"need 0 <= k < n, got k={k}, n={n}")
    g = stream.normals(n)
    gbar = np.concatenate([np.sort(np.abs(g[: n - k])), g[n - k :]])
    c_w = framework_cw(gbar, n, k)
    remaining = gbar[c_w:]
    s_c = float(gbar[c_w : n - k].sum()) - float(gbar[n - k :].sum())
    inner = float(np.sum(remaining * remaining)) - s_c * s_c / (n - c_w)
    return FrameworkSample(g=g, gbar=gbar, c_w=c_w, f_value=math.sqrt(max(inner, 0.0)))


def framework_alpha_estimate(n: int, k: int, samples: int, rng) -> float:
    """Mean of f_value^2 / n over fresh samples; converges to alpha_w(beta).

    ``rng`` is a 64-bit seed; sample i uses the derived stream
    split(rng, i), so the estimate is reproducible and order-independent.
    """
    n, k, samples = int(n), int(k), int(samples)
    if n < 1000:
        raise ValueError(f"n must be >= 1000 for meaningful concentration, got {n}")
    if samples < 10:
        raise ValueError(f"samples must be >= 10, got {samples}")
    total = 0.0
    for i in range(samples):
        sample = draw_framework_sample(n, k, CounterStream(split_stream_seed(rng, i)))
        total += sample.f_value**2 / n
    return total / samples


@dataclass(frozen=True)
class FrameworkResult:
    """Aggregated framework estimates for one (n, beta)."""

    n: int
    beta: float
    samples: int
    alpha_estimate: float
    cw_over_n: float


def run_framework(n: int, beta: float, samples: int, seed: int) -> FrameworkResult:
    """Convenience aggregation: alpha estimate and mean c_w/n from one seed."""
    n, samples = int(n), int(samples)
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta!r}")
    if n < 1000:
        raise ValueError(f"n must be >= 1000 for meaningful concentration, got {n}")
    if samples < 10:
        raise ValueError(f"samples must be >= 10, got {samples}")
    k = _round_half_up(beta * n)
    if not 1 <= k < n:
        raise ValueError(f"beta={beta!r} gives infeasible k={k} at n={n}")
    alpha_total = 0.0
    cw_total = 0.0
    for i in range(samples):
        sample = draw_framework_sample(n, k, CounterStream(split_stream_seed(seed, i)))
        alpha_total += sample.f_value**2 / n
        cw_total += sample.c_w / n
    return FrameworkResult(
        n=n,
        beta=beta,
        samples=samples,
        alpha_estimate=alpha_total / samples,
        cw_over_n=cw_total / samples,
    )
