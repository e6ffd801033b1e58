"""Exact equilibrium analysis: best responses, pure Nash enumeration, optima,
price of anarchy against closed-form worst-case bounds, per-instance bound
certificates, and randomized worst-case instance search.

Everything here is exhaustive and deterministic. Enumeration exploits the
compromise structure: a blind or isolated agent's best-response set does not
depend on the rest of the profile, so its candidates are computed once and
only the remaining agents are enumerated.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional

from .game import (
    EMPTY_ACTION,
    TOLERANCE,
    Action,
    Compromise,
    GameInstance,
    JointAction,
    ModelIncompleteError,
    SeparableWelfare,
    SizeCapError,
    TabulatedWelfare,
    Utility,
    _table_map,
    base_set,
    designed_utility,
    effective_utility,
    empty_profile,
    joint_space_size,
    validate_joint_action,
    welfare_eval,
)

DEFAULT_ENUM_CAP = 10_000_000

__all__ = [
    "DEFAULT_ENUM_CAP",
    "UtilityClass",
    "EquilibriumSet",
    "PoAReport",
    "ChainStep",
    "BoundChainCertificate",
    "SearchConfig",
    "best_response_set",
    "is_pne",
    "enumerate_pne",
    "optimal_welfare",
    "theoretical_poa",
    "instance_poa",
    "subgame",
    "check_bound_chain_general",
    "check_bound_chain_mc",
    "worst_case_search",
]


class UtilityClass(Enum):
    GENERAL_VUG = "vug"
    MARGINAL_CONTRIBUTION = "mc"


@dataclass(frozen=True)
class EquilibriumSet:
    """All pure Nash equilibria, in lexicographic enumeration order."""

    profiles: tuple
    welfares: tuple

    @property
    def is_empty(self) -> bool:
        return not self.profiles

    def worst(self):
        """(welfare, profile) of the worst equilibrium; first among ties."""
        if self.is_empty:
            return None
        idx = 0
        for i in range(1, len(self.welfares)):
            if self.welfares[i] < self.welfares[idx]:
                idx = i
        return self.welfares[idx], self.profiles[idx]

    def best(self):
        """(welfare, profile) of the best equilibrium; first among ties."""
        if self.is_empty:
            return None
        idx = 0
        for i in range(1, len(self.welfares)):
            if self.welfares[i] > self.welfares[idx]:
                idx = i
        return self.welfares[idx], self.profiles[idx]


@dataclass(frozen=True)
class PoAReport:
    opt_welfare: float
    opt_profile: JointAction
    worst_ne_welfare: Optional[float]
    worst_ne_profile: Optional[JointAction]
    ratio: Optional[float]
    theoretical_bound: float
    bound_satisfied: Optional[bool]
    pne_count: int


@dataclass(frozen=True)
class ChainStep:
    label: str
    left: float
    right: float
    holds: bool


@dataclass(frozen=True)
class BoundChainCertificate:
    """Numeric evaluation of a worst-case proof chain on one instance."""

    kind: str  # "2+k" or "1+k"
    steps: tuple
    holds: bool
    extrapolated: bool  # evaluated outside the range the chain was derived for


# ---------------------------------------------------------------------------
# fast per-game evaluation tables


class _Engine:
    """Precomputed tables driving the enumeration inner loops."""

    def __init__(self, game: GameInstance):
        self.game = game
        self.n = game.n
        self.m = game.num_resources
        self.separable = game.separable
        self.actions = [list(acts) for acts in game.action_sets]
        self.act_res = [
            [tuple(sorted(a)) for a in acts] for acts in game.action_sets
        ]
        self.is_mc = [u is Utility.MARGINAL_CONTRIBUTION for u in game.utilities]
        lab = game.compromise
        self.visible = [c in (Compromise.NORMAL, Compromise.BLIND) for c in lab]
        self.normal = [i for i, c in enumerate(lab) if c is Compromise.NORMAL]
        self.free_compromised = [
            i for i, c in enumerate(lab) if c in (Compromise.BLIND, Compromise.ISOLATED)
        ]
        self.disabled = [i for i, c in enumerate(lab) if c is Compromise.DISABLED]
        if self.separable:
            self.curves = [tuple(c) for c in game.welfare.curves]
        else:
            self.table = _table_map(game.welfare)

    def _lookup(self, key) -> float:
        try:
            return self.table[key]
        except KeyError:
            raise ModelIncompleteError(
                f"no welfare table entry for base set {sorted(key)}"
            ) from None

    def alone_utilities(self, i: int):
        """Effective utilities of a blind/isolated agent, one per action."""
        zero = [0] * self.m
        return [self.candidate_utility(i, res, zero) for res in self.act_res[i]]

    def candidate_utility(self, i: int, res, base_counts) -> float:
        """Utility of agent i playing the resources ``res`` on top of the
        visible context ``base_counts`` (which must exclude agent i)."""
        if self.separable:
            curves = self.curves
            u = 0.0
            if self.is_mc[i]:
                for r in res:
                    c = base_counts[r]
                    cv = curves[r]
                    u += cv[c + 1] - cv[c]
            else:
                for r in res:
                    c = base_counts[r] + 1
                    u += curves[r][c] / c
            return u
        # tabulated welfare: base_counts is a frozenset here
        key = base_counts | frozenset(res)
        return self._lookup(key) - self._lookup(base_counts)

    def visible_context(self, idxs, skip: int):
        """Counts (or base set) of all visible agents except ``skip``."""
        if self.separable:
            counts = [0] * self.m
            for j, aj in enumerate(idxs):
                if j != skip and self.visible[j]:
                    for r in self.act_res[j][aj]:
                        counts[r] += 1
            return counts
        out = set()
        for j, aj in enumerate(idxs):
            if j != skip and self.visible[j]:
                out |= self.actions[j][aj]
        return frozenset(out)

    def welfare_of_indices(self, idxs) -> float:
        if self.separable:
            counts = [0] * self.m
            for j, aj in enumerate(idxs):
                for r in self.act_res[j][aj]:
                    counts[r] += 1
            curves = self.curves
            total = 0.0
            for r in range(self.m):
                total += curves[r][counts[r]]
            return total
        key = frozenset().union(*(self.actions[j][aj] for j, aj in enumerate(idxs)))
        return self._lookup(key)

    def profile_from_indices(self, idxs) -> JointAction:
        return tuple(self.actions[j][aj] for j, aj in enumerate(idxs))


def _argmax_indices(values, tol: float = TOLERANCE):
    best = max(values)
    return [j for j, v in enumerate(values) if v >= best - tol]


# ---------------------------------------------------------------------------
# best responses and equilibria


def best_response_set(game: GameInstance, i: int, a: JointAction):
    """All actions of agent i maximizing its effective utility at ``a``,
    ties kept within the global tolerance. Disabled agents return only the
    empty action."""
    if game.compromise[i] is Compromise.DISABLED:
        return (EMPTY_ACTION,)
    utilities = [
        effective_utility(game, i, a[:i] + (act,) + a[i + 1 :])
        for act in game.action_sets[i]
    ]
    keep = _argmax_indices(utilities)
    return tuple(game.action_sets[i][j] for j in keep)


def is_pne(game: GameInstance, a: JointAction) -> bool:
    """True iff every agent's entry is in its best-response set at ``a``."""
    validate_joint_action(game, a)
    for i in range(game.n):
        if a[i] not in best_response_set(game, i, a):
            return False
    return True


def enumerate_pne(game: GameInstance, cap: int = DEFAULT_ENUM_CAP) -> EquilibriumSet:
    """Exhaustively list every pure Nash equilibrium.

    Deterministic lexicographic order (agent index, then action index).
    Blind and isolated agents are fixed to their profile-independent
    best-response candidates; disabled agents to the empty action; only
    normal agents' conditions are re-checked per candidate profile.
    """
    size = joint_space_size(game)
    if size > cap:
        raise SizeCapError(f"{size} joint actions exceed the cap of {cap}")
    eng = _Engine(game)

    candidates = []
    for i in range(eng.n):
        lab = game.compromise[i]
        if lab is Compromise.DISABLED:
            candidates.append([0])  # canonical order puts the empty action first
        elif lab is Compromise.NORMAL:
            candidates.append(list(range(len(eng.actions[i]))))
        else:
            candidates.append(_argmax_indices(eng.alone_utilities(i)))

    profiles = []
    welfares = []
    normal = eng.normal
    act_res = eng.act_res
    separable = eng.separable
    for idxs in itertools.product(*candidates):
        ok = True
        if separable:
            counts = eng.visible_context(idxs, skip=-1)
            for i in normal:
                cur = idxs[i]
                for r in act_res[i][cur]:
                    counts[r] -= 1
                u_cur = 0.0
                best = -math.inf
                for j, res in enumerate(act_res[i]):
                    u = eng.candidate_utility(i, res, counts)
                    if u > best:
                        best = u
                    if j == cur:
                        u_cur = u
                for r in act_res[i][cur]:
                    counts[r] += 1
                if u_cur < best - TOLERANCE:
                    ok = False
                    break
        else:
            for i in normal:
                ctx = eng.visible_context(idxs, skip=i)
                cur = idxs[i]
                utilities = [
                    eng.candidate_utility(i, res, ctx) for res in act_res[i]
                ]
                if utilities[cur] < max(utilities) - TOLERANCE:
                    ok = False
                    break
        if ok:
            profiles.append(eng.profile_from_indices(idxs))
            welfares.append(eng.welfare_of_indices(idxs))
    return EquilibriumSet(profiles=tuple(profiles), welfares=tuple(welfares))


def optimal_welfare(game: GameInstance, cap: int = DEFAULT_ENUM_CAP):
    """Exhaustive welfare maximum over the full (uncompromised) action space.

    The optimum is the design-time benchmark in the anarchy ratio, so the
    compromise labels are ignored here; equilibrium-side operations still
    force disabled agents to opt out. Lexicographically first maximizer on
    ties.
    """
    size = joint_space_size(game)
    if size > cap:
        raise SizeCapError(f"{size} joint actions exceed the cap of {cap}")
    eng = _Engine(game)
    best = -math.inf
    best_idxs = None
    ranges = [range(len(acts)) for acts in eng.actions]
    welfare_of = eng.welfare_of_indices
    for idxs in itertools.product(*ranges):
        w = welfare_of(idxs)
        if w > best:
            best = w
            best_idxs = idxs
    return best, eng.profile_from_indices(best_idxs)


def theoretical_poa(
    n: int,
    k: int,
    any_disabled: bool = False,
    any_blind: bool = False,
    utility_class: UtilityClass = UtilityClass.GENERAL_VUG,
) -> float:
    """Closed-form worst-case anarchy ratio for a game class.

    With a disabled agent the guarantee collapses to 0. Otherwise the general
    class guarantees max(1/(2+k), 1/n); marginal-contribution games improve
    to 1/(1+k) when at least one compromised agent is blind rather than
    isolated.
    """
    if not 0 <= k <= n:
        raise ValueError(f"compromised count k={k} must satisfy 0 <= k <= n={n}")
    if any_blind and k == 0:
        raise ValueError("a blind agent implies k >= 1")
    if any_disabled:
        return 0.0
    if utility_class is UtilityClass.MARGINAL_CONTRIBUTION and any_blind:
        return 1.0 / (1.0 + k)
    return max(1.0 / (2.0 + k), 1.0 / n)


def _classify(game: GameInstance):
    k = len(game.compromised)
    any_disabled = bool(game.agents_with(Compromise.DISABLED))
    any_blind = bool(game.agents_with(Compromise.BLIND))
    klass = (
        UtilityClass.MARGINAL_CONTRIBUTION
        if all(u is Utility.MARGINAL_CONTRIBUTION for u in game.utilities)
        else UtilityClass.GENERAL_VUG
    )
    return k, any_disabled, any_blind, klass


def instance_poa(game: GameInstance, cap: int = DEFAULT_ENUM_CAP) -> PoAReport:
    """Worst equilibrium welfare over the optimum, with the class bound.

    Games with no pure Nash equilibrium (or an all-zero optimum) report an
    undefined ratio and are excluded from bound checks.
    """
    eqs = enumerate_pne(game, cap=cap)
    opt_w, opt_a = optimal_welfare(game, cap=cap)
    k, any_disabled, any_blind, klass = _classify(game)
    bound = theoretical_poa(game.n, k, any_disabled, any_blind, klass)
    worst = eqs.worst()
    if worst is None or opt_w <= TOLERANCE:
        return PoAReport(
            opt_welfare=opt_w,
            opt_profile=opt_a,
            worst_ne_welfare=None if worst is None else worst[0],
            worst_ne_profile=None if worst is None else worst[1],
            ratio=None,
            theoretical_bound=bound,
            bound_satisfied=None,
            pne_count=len(eqs.profiles),
        )
    worst_w, worst_a = worst
    ratio = worst_w / opt_w
    return PoAReport(
        opt_welfare=opt_w,
        opt_profile=opt_a,
        worst_ne_welfare=worst_w,
        worst_ne_profile=worst_a,
        ratio=ratio,
        theoretical_bound=bound,
        bound_satisfied=ratio >= bound - TOLERANCE,
        pne_count=len(eqs.profiles),
    )


# ---------------------------------------------------------------------------
# reduced game over the uncompromised agents


def subgame(game: GameInstance, fixed: Mapping) -> GameInstance:
    """The residual game among normal agents once every blind and isolated
    agent has committed to an action.

    ``fixed`` must assign an admissible action to each blind/isolated agent.
    The residual welfare is the parent welfare gain over the committed blind
    profile (isolated agents are invisible to the remaining agents, so only
    blind commitments enter), tabulated over the base sets the remaining
    agents can reach; it is normalized by construction. Utilities are
    marginal contribution, as in the parent (which must be all-MC).
    """
    if any(u is not Utility.MARGINAL_CONTRIBUTION for u in game.utilities):
        raise ValueError("the residual game is defined for marginal-contribution games")
    free = set(game.agents_with(Compromise.BLIND, Compromise.ISOLATED))
    if set(fixed) != free:
        missing = sorted(free - set(fixed))
        extra = sorted(set(fixed) - free)
        raise ValueError(
            f"fixed actions must cover exactly the blind/isolated agents "
            f"(missing {missing}, unexpected {extra})"
        )
    for i, act in fixed.items():
        if frozenset(act) not in game.action_sets[i]:
            raise ValueError(f"fixed action for agent {i} is not admissible")

    blind = game.agents_with(Compromise.BLIND)
    committed = tuple(
        frozenset(fixed[i]) if i in blind else EMPTY_ACTION for i in range(game.n)
    )
    base_welfare = welfare_eval(game, committed)

    keep = [i for i in range(game.n) if game.compromise[i] is Compromise.NORMAL]
    reachable = set()
    for combo in itertools.product(*(game.action_sets[i] for i in keep)):
        reachable.add(frozenset().union(*combo) if combo else frozenset())
    reachable.add(EMPTY_ACTION)

    table = {}
    for subset in reachable:
        # one phantom selection per resource in the subset, on top of the
        # committed blind profile (count-aware for separable parents)
        if game.separable:
            counts = [0] * game.num_resources
            for act in committed:
                for r in act:
                    counts[r] += 1
            for r in subset:
                counts[r] += 1
            curves = game.welfare.curves
            value = sum(curves[r][counts[r]] for r in range(len(curves)))
        else:
            key = base_set(committed) | subset
            entry = _table_map(game.welfare).get(key)
            if entry is None:
                raise ModelIncompleteError(
                    f"no welfare table entry for base set {sorted(key)}"
                )
            value = entry
        table[subset] = value - base_welfare

    return GameInstance(
        welfare=TabulatedWelfare.from_mapping(table, game.num_resources),
        action_sets=tuple(game.action_sets[i] for i in keep),
        utilities=(Utility.MARGINAL_CONTRIBUTION,) * len(keep),
        compromise=(Compromise.NORMAL,) * len(keep),
    )


# ---------------------------------------------------------------------------
# bound-chain certificates


def _union(a: JointAction, b: JointAction) -> JointAction:
    return tuple(x | y for x, y in zip(a, b))


def _only(a: JointAction, agents) -> JointAction:
    keep = set(agents)
    return tuple(act if i in keep else EMPTY_ACTION for i, act in enumerate(a))


def _solo(n: int, i: int, act: Action) -> JointAction:
    return tuple(act if j == i else EMPTY_ACTION for j in range(n))


def _validate_chain_inputs(game, a_ne, a_opt, cap):
    validate_joint_action(game, a_ne)
    validate_joint_action(game, a_opt, playable=False)
    if not is_pne(game, a_ne):
        raise ValueError("a_ne is not a pure Nash equilibrium of this game")
    opt_w, _ = optimal_welfare(game, cap=cap)
    if welfare_eval(game, a_opt) < opt_w - TOLERANCE:
        raise ValueError("a_opt is not welfare-optimal for this game")


def check_bound_chain_general(
    game: GameInstance,
    a_ne: JointAction,
    a_opt: JointAction,
    validate: bool = True,
    cap: int = DEFAULT_ENUM_CAP,
) -> BoundChainCertificate:
    """Evaluate the (2+k)-factor worst-case chain on one instance.

    Walks the inequality chain from the optimal welfare down to
    (2+k)·W(equilibrium), evaluating both sides of every step with the
    instance's observation structure, for any valid-utility assignment with
    no disabled agents. The chain is derived for k < n-1; larger k is still
    evaluated but flagged extrapolated.
    """
    if game.agents_with(Compromise.DISABLED):
        raise ValueError("the chain is defined for games without disabled agents")
    if validate:
        _validate_chain_inputs(game, a_ne, a_opt, cap)

    n = game.n
    comp = set(game.compromised)
    k = len(comp)
    normals = [i for i in range(n) if i not in comp]
    hidden = set(game.agents_with(Compromise.ISOLATED, Compromise.DISABLED))
    w = lambda p: welfare_eval(game, p)

    w_opt = w(a_opt)
    w_ne = w(a_ne)
    union_all = _union(a_opt, a_ne)

    # telescoped insertion of optimal actions (agent order is index order)
    telescope = 0.0
    for i in range(n):
        upto = _union(a_ne, _only(a_opt, range(i + 1)))
        before = _union(a_ne, _only(a_opt, range(i)))
        telescope += w(upto) - w(before)

    # observation sets: normal agents see everyone but the isolated (blind
    # agents stay visible); compromised agents see nobody
    observed = {
        i: (set() if i in comp else set(range(n)) - hidden - {i}) for i in range(n)
    }

    # the same marginals, each taken in its observer's reduced context
    reduced = 0.0
    for i in range(n):
        ctx = _only(a_ne, observed[i])
        reduced += w(_union(_solo(n, i, a_opt[i]), ctx)) - w(ctx)

    opt_at_ctx = sum(
        designed_utility(
            game, i, _union(_solo(n, i, a_opt[i]), _only(a_ne, observed[i]))
        )
        for i in normals
    )
    solo_opt = sum(w(_solo(n, i, a_opt[i])) for i in comp)

    ne_at_ctx = sum(
        designed_utility(
            game, i, _union(_solo(n, i, a_ne[i]), _only(a_ne, observed[i]))
        )
        for i in normals
    )
    eff_opt_alone = sum(effective_utility(game, i, _solo(n, i, a_opt[i])) for i in comp)
    eff_ne_alone = sum(effective_utility(game, i, _solo(n, i, a_ne[i])) for i in comp)
    solo_ne = sum(w(_solo(n, i, a_ne[i])) for i in comp)

    values = [
        ("optimum_below_joined_profiles", w_opt, w(union_all)),
        ("telescoped_insertion", w(union_all), w_ne + telescope),
        ("submodular_context_reduction", w_ne + telescope, w_ne + reduced),
        (
            "utilities_dominate_marginals",
            w_ne + reduced,
            w_ne + opt_at_ctx + solo_opt,
        ),
        (
            "equilibrium_deviations_unprofitable",
            w_ne + opt_at_ctx + solo_opt,
            w_ne + ne_at_ctx + eff_opt_alone,
        ),
        (
            "utility_sums_below_welfare",
            w_ne + ne_at_ctx + eff_opt_alone,
            2.0 * w_ne + eff_ne_alone,
        ),
        (
            "compromised_utilities_below_solo_welfare",
            2.0 * w_ne + eff_ne_alone,
            2.0 * w_ne + solo_ne,
        ),
        (
            "solo_welfares_below_equilibrium_welfare",
            2.0 * w_ne + solo_ne,
            (2.0 + k) * w_ne,
        ),
    ]
    steps = tuple(
        ChainStep(label, left, right, left <= right + TOLERANCE)
        for label, left, right in values
    )
    return BoundChainCertificate(
        kind="2+k",
        steps=steps,
        holds=all(s.holds for s in steps),
        extrapolated=k >= n - 1,
    )


def check_bound_chain_mc(
    game: GameInstance,
    a_ne: JointAction,
    a_opt: JointAction,
    validate: bool = True,
    cap: int = DEFAULT_ENUM_CAP,
) -> BoundChainCertificate:
    """Evaluate the (1+k)-factor chain for marginal-contribution games with
    at least one blind agent and no disabled agents.

    Uses the residual welfare over the normal agents, with the blind agents
    committed to their equilibrium actions; the residual quantities are
    evaluated count-aware through the parent welfare.
    """
    if any(u is not Utility.MARGINAL_CONTRIBUTION for u in game.utilities):
        raise ValueError("the chain is defined for marginal-contribution games")
    blind = game.agents_with(Compromise.BLIND)
    if not blind:
        raise ValueError("the chain needs at least one blind agent")
    if game.agents_with(Compromise.DISABLED):
        raise ValueError("the chain is defined for games without disabled agents")
    if validate:
        _validate_chain_inputs(game, a_ne, a_opt, cap)

    n = game.n
    comp = set(game.compromised)
    k = len(comp)
    normals = [i for i in range(n) if i not in comp]
    w = lambda p: welfare_eval(game, p)

    ne_blind = _only(a_ne, blind)
    w_ne_blind = w(ne_blind)
    w_ne = w(a_ne)
    w_opt = w(a_opt)

    def residual(profile_over_normals: JointAction) -> float:
        return w(_union(profile_over_normals, ne_blind)) - w_ne_blind

    opt_normals = _only(a_opt, normals)
    ne_normals = _only(a_ne, normals)

    solo_opt = sum(w(_solo(n, i, a_opt[i])) for i in comp)
    solo_ne = sum(w(_solo(n, i, a_ne[i])) for i in comp)

    # exhaustive residual optimum over the normal agents' joint actions
    best_residual = 0.0
    size = 1
    for i in normals:
        size *= len(game.action_sets[i])
    if size > cap:
        raise SizeCapError(f"{size} residual joint actions exceed the cap of {cap}")
    for combo in itertools.product(*(game.action_sets[i] for i in normals)):
        prof = list(empty_profile(game))
        for i, act in zip(normals, combo):
            prof[i] = act
        best_residual = max(best_residual, residual(tuple(prof)))

    joined = w(_union(a_opt, ne_blind))
    values = [
        ("optimum_below_joined_blind_profile", w_opt, joined),
        ("submodular_peel_of_compromised", joined, w(_union(opt_normals, ne_blind)) + solo_opt),
        (
            "compromised_best_respond_alone",
            w(_union(opt_normals, ne_blind)) + solo_opt,
            w(_union(opt_normals, ne_blind)) + solo_ne,
        ),
        (
            "fold_into_blind_profile",
            w(_union(opt_normals, ne_blind)) + solo_ne,
            w(_union(opt_normals, ne_blind)) + w_ne_blind + (k - 1) * w_ne,
        ),
        (
            "residual_welfare_rewrite",
            w(_union(opt_normals, ne_blind)) + w_ne_blind + (k - 1) * w_ne,
            residual(opt_normals) + 2.0 * w_ne_blind + (k - 1) * w_ne,
        ),
        (
            "residual_optimum",
            residual(opt_normals) + 2.0 * w_ne_blind + (k - 1) * w_ne,
            best_residual + 2.0 * w_ne_blind + (k - 1) * w_ne,
        ),
        (
            "residual_factor_two",
            best_residual + 2.0 * w_ne_blind + (k - 1) * w_ne,
            2.0 * residual(ne_normals) + 2.0 * w_ne_blind + (k - 1) * w_ne,
        ),
        (
            "residual_unfold",
            2.0 * residual(ne_normals) + 2.0 * w_ne_blind + (k - 1) * w_ne,
            2.0 * w(_union(ne_normals, ne_blind)) + (k - 1) * w_ne,
        ),
        (
            "joined_equilibrium_below_full",
            2.0 * w(_union(ne_normals, ne_blind)) + (k - 1) * w_ne,
            (1.0 + k) * w_ne,
        ),
    ]
    steps = tuple(
        ChainStep(label, left, right, left <= right + TOLERANCE)
        for label, left, right in values
    )
    return BoundChainCertificate(
        kind="1+k",
        steps=steps,
        holds=all(s.holds for s in steps),
        extrapolated=False,
    )


# ---------------------------------------------------------------------------
# worst-case instance search


@dataclass(frozen=True)
class SearchConfig:
    """Randomized search over small flat-curve instances.

    ``value_grid`` supplies per-resource values (curves are flat after one
    selection, the shape every known tight family uses); ``budget`` is the
    number of candidates sampled. Fully determined by ``seed``.
    """

    n: int
    k: int
    labels: tuple
    utility_class: UtilityClass
    value_grid: tuple
    budget: int
    seed: int
    max_resources: int = 4
    max_actions: int = 3


def worst_case_search(config: SearchConfig):
    """Sample instances and keep the one with the smallest defined ratio.

    Returns (game, report) of the worst instance found; candidates with an
    undefined ratio (no equilibrium or zero optimum) are skipped. Best-effort
    and deterministic given the seed.
    """
    if config.k > config.n:
        raise ValueError("k must not exceed n")
    if len(config.labels) != config.k:
        raise ValueError("labels must have one entry per compromised agent")
    rng = random.Random(config.seed)
    best = None
    for _ in range(config.budget):
        game = _sample_candidate(config, rng)
        try:
            report = instance_poa(game)
        except SizeCapError:
            continue
        if report.ratio is None:
            continue
        if best is None or report.ratio < best[1].ratio - 0.0:
            best = (game, report)
    if best is None:
        raise RuntimeError("no sampled candidate produced a defined ratio")
    return best


def _sample_candidate(config: SearchConfig, rng: random.Random) -> GameInstance:
    n = config.n
    m = rng.randint(1, config.max_resources)
    curves = []
    for _ in range(m):
        v = float(rng.choice(config.value_grid))
        curves.append((0.0,) + (v,) * n)
    action_sets = []
    for _ in range(n):
        acts = set()
        want = rng.randint(1, max(1, config.max_actions - 1))
        for _ in range(want * 3):
            if len(acts) >= want:
                break
            size = 1 if (m == 1 or rng.random() < 0.7) else 2
            acts.add(frozenset(rng.sample(range(m), size)))
        action_sets.append(tuple(acts) + (EMPTY_ACTION,))
    if config.utility_class is UtilityClass.MARGINAL_CONTRIBUTION:
        utilities = (Utility.MARGINAL_CONTRIBUTION,) * n
    else:
        utilities = tuple(
            rng.choice((Utility.MARGINAL_CONTRIBUTION, Utility.EQUAL_SHARE))
            for _ in range(n)
        )
    compromise = [Compromise.NORMAL] * n
    for pos, lab in zip(sorted(rng.sample(range(n), config.k)), config.labels):
        compromise[pos] = Compromise(lab)
    return GameInstance(
        welfare=SeparableWelfare(curves=tuple(curves)),
        action_sets=tuple(action_sets),
        utilities=utilities,
        compromise=tuple(compromise),
    )
