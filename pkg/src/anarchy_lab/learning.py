"""Log-linear learning over effective utilities, temperature sweeps, and a
uniform-play baseline.

One uniformly chosen non-disabled agent updates per step, resampling its
action from a softmax (at temperature T) of its effective utility with all
other actions held fixed. Runs are reproducible: a run is a pure function of
(game, temperature, steps, seed, start profile), and sweep trials derive
their sub-seeds from the master seed by a fixed splitting scheme, so results
do not depend on worker count or execution order.
"""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .equilibrium import _Engine
from .game import (
    EMPTY_ACTION,
    Compromise,
    GameInstance,
    JointAction,
    validate_joint_action,
)

__all__ = [
    "LearningState",
    "LllRunResult",
    "SweepRow",
    "SweepResult",
    "action_distribution",
    "lll_step",
    "lll_run",
    "temperature_sweep",
    "random_play_baseline",
    "sub_seed",
]

THREADS_ENV = "ANARCHY_LAB_THREADS"


@dataclass
class LearningState:
    """Current profile, step counter, and the (shared, stateful) generator."""

    current: JointAction
    step: int
    rng: random.Random


@dataclass(frozen=True)
class LllRunResult:
    """Summary of one trajectory; welfare is recorded after every step."""

    temperature: float
    steps: int
    seed: int
    burn_in: int
    mean_welfare: float
    std_welfare: float
    min_welfare: float
    max_welfare: float
    final: JointAction
    trace: Optional[tuple]

    def row(self, trial: int) -> "SweepRow":
        return SweepRow(
            temperature=self.temperature,
            trial=trial,
            mean_welfare=self.mean_welfare,
            std_welfare=self.std_welfare,
            min_welfare=self.min_welfare,
            max_welfare=self.max_welfare,
            steps=self.steps,
            seed=self.seed,
        )


@dataclass(frozen=True)
class SweepRow:
    temperature: float
    trial: int
    mean_welfare: float
    std_welfare: float
    min_welfare: float
    max_welfare: float
    steps: int
    seed: int


CSV_COLUMNS = (
    "temperature",
    "trial",
    "mean_welfare",
    "std_welfare",
    "min_welfare",
    "max_welfare",
    "steps",
    "seed",
)


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    def pooled_mean(self, temperature: float) -> float:
        means = [r.mean_welfare for r in self.rows if r.temperature == temperature]
        if not means:
            raise KeyError(f"no rows at temperature {temperature!r}")
        return sum(means) / len(means)

    def temperatures(self) -> tuple:
        seen = []
        for r in self.rows:
            if r.temperature not in seen:
                seen.append(r.temperature)
        return tuple(seen)

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        repr(r.temperature),
                        str(r.trial),
                        repr(r.mean_welfare),
                        repr(r.std_welfare),
                        repr(r.min_welfare),
                        repr(r.max_welfare),
                        str(r.steps),
                        str(r.seed),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# shared arithmetic (the reference step and the fast runner must agree
# bit-for-bit, so both funnel through these helpers)


@lru_cache(maxsize=64)
def _ctx(game: GameInstance) -> _Engine:
    return _Engine(game)


def _updatable(game: GameInstance):
    return [
        i for i in range(game.n) if game.compromise[i] is not Compromise.DISABLED
    ]


def _agent_utilities(eng: _Engine, game: GameInstance, i: int, a: JointAction):
    """Effective utility of each of agent i's actions, others held at ``a``."""
    lab = game.compromise[i]
    if lab in (Compromise.BLIND, Compromise.ISOLATED):
        base = [0] * eng.m if eng.separable else frozenset()
    else:
        if eng.separable:
            base = [0] * eng.m
            for j in range(eng.n):
                if j != i and eng.visible[j]:
                    for r in sorted(a[j]):
                        base[r] += 1
        else:
            out = set()
            for j in range(eng.n):
                if j != i and eng.visible[j]:
                    out |= a[j]
            base = frozenset(out)
    return [eng.candidate_utility(i, res, base) for res in eng.act_res[i]]


def _softmax(utilities, T: float):
    mx = max(utilities)
    weights = [math.exp((u - mx) / T) for u in utilities]
    total = sum(weights)
    return [w / total for w in weights]


def _sample_index(probs, r: float) -> int:
    acc = 0.0
    for j, p in enumerate(probs):
        acc += p
        if r < acc:
            return j
    return len(probs) - 1


def action_distribution(game: GameInstance, i: int, a: JointAction, T: float):
    """Softmax sampling distribution over agent i's actions at profile ``a``.

    Computed max-subtracted, so tiny temperatures with large utility gaps
    underflow to 0 rather than overflowing.
    """
    if T <= 0:
        raise ValueError("temperature must be positive")
    eng = _ctx(game)
    return _softmax(_agent_utilities(eng, game, i, a), T)


def lll_step(game: GameInstance, state: LearningState, T: float) -> LearningState:
    """One asynchronous update: a uniformly chosen non-disabled agent
    resamples its action from the softmax of its effective utilities."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    upd = _updatable(game)
    i = upd[state.rng.randrange(len(upd))]
    eng = _ctx(game)
    probs = _softmax(_agent_utilities(eng, game, i, state.current), T)
    j = _sample_index(probs, state.rng.random())
    new = state.current[:i] + (game.action_sets[i][j],) + state.current[i + 1 :]
    return LearningState(current=new, step=state.step + 1, rng=state.rng)


# ---------------------------------------------------------------------------
# trajectory runner


def lll_run(
    game: GameInstance,
    T: float,
    steps: int,
    seed: int,
    a0: Optional[JointAction] = None,
    burn_in: int = 0,
    keep_trace: bool = False,
) -> LllRunResult:
    """Run the dynamics for ``steps`` updates and summarize the welfare.

    Equivalent to iterating :func:`lll_step` from ``a0`` (default: everyone
    opted out) with ``random.Random(seed)``, but with the welfare maintained
    incrementally. Statistics cover the steps after ``burn_in``; the trace,
    when kept, covers all steps.
    """
    if T <= 0:
        raise ValueError("temperature must be positive")
    if steps < 1:
        raise ValueError("need at least one step")
    if not 0 <= burn_in < steps:
        raise ValueError("burn_in must lie in [0, steps)")
    if a0 is None:
        a0 = tuple(EMPTY_ACTION for _ in range(game.n))
    validate_joint_action(game, a0)
    rng = random.Random(seed)
    eng = _ctx(game)
    runner = _SeparableRunner(eng, game, a0) if eng.separable else _GenericRunner(eng, game, a0)

    upd = _updatable(game)
    n_upd = len(upd)
    total = 0.0
    total_sq = 0.0
    w_min = math.inf
    w_max = -math.inf
    count = 0
    trace = [] if keep_trace else None
    for step in range(steps):
        i = upd[rng.randrange(n_upd)]
        utilities = runner.utilities(i)
        probs = _softmax(utilities, T)
        j = _sample_index(probs, rng.random())
        w = runner.apply(i, j)
        if trace is not None:
            trace.append(w)
        if step >= burn_in:
            count += 1
            total += w
            total_sq += w * w
            if w < w_min:
                w_min = w
            if w > w_max:
                w_max = w
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    return LllRunResult(
        temperature=T,
        steps=steps,
        seed=seed,
        burn_in=burn_in,
        mean_welfare=mean,
        std_welfare=math.sqrt(var),
        min_welfare=w_min,
        max_welfare=w_max,
        final=runner.profile(),
        trace=None if trace is None else tuple(trace),
    )


class _SeparableRunner:
    """Incremental counts and welfare for separable games."""

    def __init__(self, eng: _Engine, game: GameInstance, a0: JointAction):
        self.eng = eng
        self.game = game
        self.idxs = [game.action_sets[i].index(a0[i]) for i in range(game.n)]
        self.zero = [0] * eng.m
        self.vis = [0] * eng.m
        self.counts = [0] * eng.m
        for i in range(eng.n):
            for r in eng.act_res[i][self.idxs[i]]:
                self.counts[r] += 1
                if eng.visible[i]:
                    self.vis[r] += 1
        curves = eng.curves
        self.welfare = 0.0
        for r in range(eng.m):
            self.welfare += curves[r][self.counts[r]]
        self.blindish = [
            c in (Compromise.BLIND, Compromise.ISOLATED) for c in game.compromise
        ]

    def utilities(self, i: int):
        eng = self.eng
        if self.blindish[i]:
            base = self.zero
        else:
            base = self.vis
            for r in eng.act_res[i][self.idxs[i]]:
                base[r] -= 1
        out = [eng.candidate_utility(i, res, base) for res in eng.act_res[i]]
        if not self.blindish[i]:
            for r in eng.act_res[i][self.idxs[i]]:
                base[r] += 1
        return out

    def apply(self, i: int, j: int) -> float:
        eng = self.eng
        old = self.idxs[i]
        if j != old:
            curves = eng.curves
            counts = self.counts
            for r in eng.act_res[i][old]:
                c = counts[r]
                counts[r] = c - 1
                self.welfare += curves[r][c - 1] - curves[r][c]
            for r in eng.act_res[i][j]:
                c = counts[r]
                counts[r] = c + 1
                self.welfare += curves[r][c + 1] - curves[r][c]
            if eng.visible[i]:
                vis = self.vis
                for r in eng.act_res[i][old]:
                    vis[r] -= 1
                for r in eng.act_res[i][j]:
                    vis[r] += 1
            self.idxs[i] = j
        return self.welfare

    def profile(self) -> JointAction:
        return tuple(
            self.game.action_sets[i][self.idxs[i]] for i in range(self.game.n)
        )


class _GenericRunner:
    """Straightforward profile-based runner for tabulated games."""

    def __init__(self, eng: _Engine, game: GameInstance, a0: JointAction):
        self.eng = eng
        self.game = game
        self.idxs = [game.action_sets[i].index(a0[i]) for i in range(game.n)]
        self.blindish = [
            c in (Compromise.BLIND, Compromise.ISOLATED) for c in game.compromise
        ]

    def utilities(self, i: int):
        eng = self.eng
        if self.blindish[i]:
            base = frozenset()
        else:
            base = eng.visible_context(self.idxs, skip=i)
        return [eng.candidate_utility(i, res, base) for res in eng.act_res[i]]

    def apply(self, i: int, j: int) -> float:
        self.idxs[i] = j
        return self.eng.welfare_of_indices(self.idxs)

    def profile(self) -> JointAction:
        return tuple(
            self.game.action_sets[i][self.idxs[i]] for i in range(self.game.n)
        )


# ---------------------------------------------------------------------------
# sweeps and baseline


def sub_seed(master: int, temp_index: int, trial_index: int) -> int:
    """Deterministic per-(temperature, trial) seed derived from the master.

    Fixed mixing constants; documented so shards can be reproduced in
    isolation.
    """
    return (
        master * 0x9E3779B97F4A7C15
        + (temp_index + 1) * 0xBF58476D1CE4E5B9
        + (trial_index + 1) * 0x94D049BB133111EB
    ) % 2**63


def _worker_count(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def temperature_sweep(
    game: GameInstance,
    temperatures: Sequence,
    steps: int,
    trials: int,
    seed: int,
    a0: Optional[JointAction] = None,
    burn_in: int = 0,
    workers: Optional[int] = None,
) -> SweepResult:
    """Run ``trials`` trajectories per temperature and collect per-trial rows.

    Rows are ordered by (temperature index, trial) regardless of how many
    worker threads execute them, so equal inputs give byte-identical CSVs.
    """
    temps = [float(t) for t in temperatures]
    if not temps or any(t <= 0 for t in temps):
        raise ValueError("temperatures must be positive")
    if trials < 1:
        raise ValueError("need at least one trial")
    jobs = [
        (ti, tr, temps[ti], sub_seed(seed, ti, tr))
        for ti in range(len(temps))
        for tr in range(trials)
    ]

    def run(job):
        ti, tr, T, s = job
        return lll_run(game, T, steps, s, a0=a0, burn_in=burn_in).row(tr)

    nworkers = _worker_count(workers)
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(job) for job in jobs]
    return SweepResult(rows=tuple(rows))


def random_play_baseline(game: GameInstance, steps: int, seed: int) -> float:
    """Mean welfare when the chosen agent resamples uniformly instead of by
    softmax; disabled agents never update."""
    if steps < 1:
        raise ValueError("need at least one step")
    rng = random.Random(seed)
    eng = _ctx(game)
    a0 = tuple(EMPTY_ACTION for _ in range(game.n))
    runner = _SeparableRunner(eng, game, a0) if eng.separable else _GenericRunner(eng, game, a0)
    upd = _updatable(game)
    n_upd = len(upd)
    total = 0.0
    for _ in range(steps):
        i = upd[rng.randrange(n_upd)]
        j = rng.randrange(len(eng.act_res[i]))
        total += runner.apply(i, j)
    return total / steps
