"""Game model: agents choosing resource subsets, welfare, utilities, compromise.

Agents are indexed 0..n-1 and pick actions that are subsets of a common
resource pool. System welfare is either *separable* (a concave nondecreasing
value curve per resource, evaluated at the selection count) or *tabulated*
(an explicit set function on the base set of selected resources). Designed
utilities are marginal contribution (MC) or equal share (ES); a compromise
label per agent (normal / blind / isolated / disabled) rewires what each
agent's *effective* utility can see.

All values are finite nonnegative floats compared with the global tolerance
``TOLERANCE``; games are immutable after construction and every operation
here is a pure function of its inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

TOLERANCE = 1e-9

Action = frozenset
EMPTY_ACTION: Action = frozenset()
JointAction = tuple

DEFAULT_CHECK_CAP = 250_000

__all__ = [
    "TOLERANCE",
    "EMPTY_ACTION",
    "Action",
    "JointAction",
    "Utility",
    "Compromise",
    "SeparableWelfare",
    "TabulatedWelfare",
    "WelfareSpec",
    "GameInstance",
    "ValidationError",
    "ModelIncompleteError",
    "UnsupportedUtilityError",
    "SizeCapError",
    "base_set",
    "selection_counts",
    "welfare_eval",
    "marginal_contribution",
    "equal_share",
    "designed_utility",
    "observed_set",
    "observation_structure",
    "masked_profile",
    "effective_utility",
    "empty_profile",
    "joint_space_size",
    "all_profiles",
    "validate_joint_action",
    "CheckFinding",
    "SubmodularityReport",
    "VugReport",
    "check_submodular",
    "check_vug",
]


class ValidationError(ValueError):
    """A game instance (or document) violates a structural invariant."""


class ModelIncompleteError(LookupError):
    """A tabulated welfare has no entry for a reachable base set."""


class UnsupportedUtilityError(ValueError):
    """The requested utility is not admissible for this welfare form."""


class SizeCapError(RuntimeError):
    """The joint action space exceeds the configured exhaustive-search cap."""


class Utility(Enum):
    MARGINAL_CONTRIBUTION = "mc"
    EQUAL_SHARE = "es"


class Compromise(Enum):
    NORMAL = "normal"
    BLIND = "blind"
    ISOLATED = "isolated"
    DISABLED = "disabled"


@dataclass(frozen=True)
class SeparableWelfare:
    """Separable welfare: one value curve per resource, indexed by count.

    ``curves[r][c]`` is the value of resource ``r`` when exactly ``c`` agents
    select it; each curve has length n+1, starts at 0, is nonnegative,
    nondecreasing and has nonincreasing increments (decreasing marginal
    returns). Welfare of a profile is the sum of per-resource curve values at
    the selection counts, so duplicate selections of a resource count.
    """

    curves: tuple

    @property
    def num_resources(self) -> int:
        return len(self.curves)


@dataclass(frozen=True)
class TabulatedWelfare:
    """Tabulated welfare: an explicit value per base set of resources.

    Duplicate selections collapse: the welfare of a profile is the table
    value of the union of the selected actions. ``entries`` is kept as a
    canonically sorted tuple so instances hash and compare structurally.
    """

    entries: tuple  # ((frozenset, value), ...) sorted by (len, sorted ids)
    num_resources: int

    @staticmethod
    def from_mapping(table: Mapping, num_resources: int) -> "TabulatedWelfare":
        entries = tuple(
            (frozenset(s), float(v))
            for s, v in sorted(
                ((frozenset(s), v) for s, v in table.items()),
                key=lambda e: (len(e[0]), sorted(e[0])),
            )
        )
        return TabulatedWelfare(entries=entries, num_resources=num_resources)


WelfareSpec = Union[SeparableWelfare, TabulatedWelfare]


@lru_cache(maxsize=None)
def _table_map(welfare: TabulatedWelfare) -> dict:
    return dict(welfare.entries)


def _canonical_action_set(actions: Iterable, num_resources: int) -> tuple:
    """Dedupe, force the empty action in, and sort by (size, resource ids)."""
    acts = {EMPTY_ACTION}
    for a in actions:
        acts.add(frozenset(a))
    for a in acts:
        for r in a:
            if not (isinstance(r, int) and 0 <= r < num_resources):
                raise ValidationError(f"action references unknown resource id {r!r}")
    return tuple(sorted(acts, key=lambda a: (len(a), sorted(a))))


@dataclass(frozen=True)
class GameInstance:
    """An immutable game: welfare, per-agent action sets, utilities, labels.

    Action sets are canonicalized at construction (deduplicated, the empty
    opt-out action always present, sorted by size then resource ids), so the
    action *index* order used by enumeration and serialization is a pure
    function of the content.
    """

    welfare: WelfareSpec
    action_sets: tuple
    utilities: tuple
    compromise: tuple

    def __post_init__(self):
        m = self.welfare.num_resources
        canon = tuple(
            _canonical_action_set(acts, m) for acts in self.action_sets
        )
        object.__setattr__(self, "action_sets", canon)
        object.__setattr__(self, "utilities", tuple(Utility(u) for u in self.utilities))
        object.__setattr__(
            self, "compromise", tuple(Compromise(c) for c in self.compromise)
        )
        self._validate()

    def _validate(self) -> None:
        n = len(self.action_sets)
        if n == 0:
            raise ValidationError("a game needs at least one agent")
        if len(self.utilities) != n or len(self.compromise) != n:
            raise ValidationError(
                "utilities and compromise labels must have one entry per agent"
            )
        w = self.welfare
        if isinstance(w, SeparableWelfare):
            for r, curve in enumerate(w.curves):
                _validate_curve(curve, r, n)
        elif isinstance(w, TabulatedWelfare):
            seen = set()
            for subset, value in w.entries:
                if subset in seen:
                    raise ValidationError(f"duplicate table entry for {sorted(subset)}")
                seen.add(subset)
                for r in subset:
                    if not (0 <= r < w.num_resources):
                        raise ValidationError(
                            f"table subset references unknown resource id {r}"
                        )
                if value < 0:
                    raise ValidationError(
                        f"table value for {sorted(subset)} is negative"
                    )
            empty = _table_map(w).get(EMPTY_ACTION, 0.0)
            if empty != 0.0:
                raise ValidationError("welfare is not normalized: W(empty) != 0")
        else:
            raise ValidationError(f"unknown welfare spec {type(w).__name__}")
        for i, u in enumerate(self.utilities):
            if u is Utility.EQUAL_SHARE and not isinstance(w, SeparableWelfare):
                raise UnsupportedUtilityError(
                    f"agent {i}: equal-share utility needs separable welfare"
                )

    @property
    def n(self) -> int:
        return len(self.action_sets)

    @property
    def num_resources(self) -> int:
        return self.welfare.num_resources

    @property
    def separable(self) -> bool:
        return isinstance(self.welfare, SeparableWelfare)

    def agents_with(self, *labels: Compromise) -> tuple:
        return tuple(i for i, c in enumerate(self.compromise) if c in labels)

    @property
    def compromised(self) -> tuple:
        return self.agents_with(Compromise.BLIND, Compromise.ISOLATED, Compromise.DISABLED)


def _validate_curve(curve: Sequence, r: int, n: int) -> None:
    if len(curve) != n + 1:
        raise ValidationError(
            f"resource {r}: curve must list values for counts 0..{n} "
            f"(got {len(curve)} entries)"
        )
    if curve[0] != 0.0:
        raise ValidationError(f"resource {r}: curve must start at 0 (normalized)")
    for c in range(len(curve)):
        if curve[c] < 0:
            raise ValidationError(f"resource {r}: negative value at count {c}")
        if c >= 1 and curve[c] < curve[c - 1]:
            raise ValidationError(f"resource {r}: curve decreases at count {c}")
        if c >= 2 and curve[c] - curve[c - 1] > curve[c - 1] - curve[c - 2] + TOLERANCE:
            raise ValidationError(
                f"resource {r}: increasing marginal returns at count {c} "
                "(curve is not concave)"
            )


# ---------------------------------------------------------------------------
# profile helpers


def empty_profile(game: GameInstance) -> JointAction:
    return (EMPTY_ACTION,) * game.n


def base_set(a: JointAction) -> frozenset:
    """The base set R(a): union of all selected resources."""
    out = set()
    for act in a:
        out |= act
    return frozenset(out)


def selection_counts(game: GameInstance, a: JointAction):
    """Per-resource selection counts |a|_r (duplicates count)."""
    counts = [0] * game.num_resources
    for act in a:
        for r in act:
            counts[r] += 1
    return counts


def joint_space_size(game: GameInstance) -> int:
    size = 1
    for acts in game.action_sets:
        size *= len(acts)
    return size


def all_profiles(game: GameInstance):
    """Every admissible profile, lexicographic by agent then action index."""
    return itertools.product(*game.action_sets)


def validate_joint_action(game: GameInstance, a: JointAction, playable: bool = True) -> None:
    """Raise unless ``a`` is admissible (and, if ``playable``, respects
    forced empty actions of disabled agents)."""
    if len(a) != game.n:
        raise ValidationError(f"profile has {len(a)} entries for {game.n} agents")
    for i, act in enumerate(a):
        if act not in game.action_sets[i]:
            raise ValidationError(f"agent {i}: action {sorted(act)} not in its action set")
        if playable and game.compromise[i] is Compromise.DISABLED and act:
            raise ValidationError(f"agent {i} is disabled and must play the empty action")


# ---------------------------------------------------------------------------
# welfare and utilities


def welfare_eval(game: GameInstance, a: JointAction) -> float:
    """System welfare of a profile.

    Separable welfare sums each resource's curve at its selection count;
    tabulated welfare looks up the base set (duplicate selections collapse).
    Raises ModelIncompleteError when a tabulated base set has no entry.
    """
    w = game.welfare
    if isinstance(w, SeparableWelfare):
        curves = w.curves
        counts = selection_counts(game, a)
        total = 0.0
        for r in range(len(curves)):
            total += curves[r][counts[r]]
        return total
    key = base_set(a)
    table = _table_map(w)
    try:
        return table[key]
    except KeyError:
        raise ModelIncompleteError(
            f"no welfare table entry for base set {sorted(key)}"
        ) from None


def _replace(a: JointAction, i: int, act: Action) -> JointAction:
    return a[:i] + (act,) + a[i + 1 :]


def marginal_contribution(game: GameInstance, i: int, a: JointAction) -> float:
    """W(a) minus W with agent i opted out."""
    return welfare_eval(game, a) - welfare_eval(game, _replace(a, i, EMPTY_ACTION))


def equal_share(game: GameInstance, i: int, a: JointAction) -> float:
    """Agent i's equal split of each selected resource's current value."""
    w = game.welfare
    if not isinstance(w, SeparableWelfare):
        raise UnsupportedUtilityError("equal-share utility needs separable welfare")
    counts = selection_counts(game, a)
    total = 0.0
    for r in sorted(a[i]):
        c = counts[r]
        total += w.curves[r][c] / c
    return total


def designed_utility(game: GameInstance, i: int, a: JointAction) -> float:
    """The assigned (pre-compromise) utility U_i evaluated at ``a``."""
    if game.utilities[i] is Utility.MARGINAL_CONTRIBUTION:
        return marginal_contribution(game, i, a)
    return equal_share(game, i, a)


def observed_set(game: GameInstance, i: int) -> frozenset:
    """Agents whose actions agent i's effective utility depends on.

    A normal agent observes everyone except isolated and disabled agents
    (blind agents remain visible); blind, isolated and disabled agents
    observe nobody.
    """
    if game.compromise[i] is not Compromise.NORMAL:
        return frozenset()
    hidden = {Compromise.ISOLATED, Compromise.DISABLED}
    return frozenset(
        j for j in range(game.n) if j != i and game.compromise[j] not in hidden
    )


def observation_structure(game: GameInstance) -> tuple:
    """All observed sets at once, indexed by agent."""
    return tuple(observed_set(game, i) for i in range(game.n))


def masked_profile(game: GameInstance, i: int, a: JointAction) -> JointAction:
    """The profile agent i's designed utility is actually evaluated on."""
    keep = observed_set(game, i) | {i}
    return tuple(act if j in keep else EMPTY_ACTION for j, act in enumerate(a))


def effective_utility(game: GameInstance, i: int, a: JointAction) -> float:
    """Utility after the compromise transform.

    Normal agents evaluate U_i with every isolated/disabled entry emptied;
    blind and isolated agents see only their own action; disabled agents
    get 0.
    """
    if game.compromise[i] is Compromise.DISABLED:
        return 0.0
    return designed_utility(game, i, masked_profile(game, i, a))


# ---------------------------------------------------------------------------
# validators


@dataclass(frozen=True)
class CheckFinding:
    kind: str
    message: str
    witness: Optional[dict] = None


@dataclass(frozen=True)
class SubmodularityReport:
    ok: bool
    failure: Optional[CheckFinding]
    contexts_checked: int
    pairs_checked: int


@dataclass(frozen=True)
class VugReport:
    """Definition-style validity report for the assigned utilities."""

    ok: bool
    welfare: SubmodularityReport
    utility_dominates_marginal: bool  # U_i >= marginal contribution everywhere
    utility_sum_bounded: bool  # sum_i U_i <= W everywhere
    utility_sum_tight: bool  # the sum bound holds with equality everywhere
    failure: Optional[CheckFinding]
    profiles_checked: int


def _require_cap(game: GameInstance, cap: int) -> None:
    size = joint_space_size(game)
    if size > cap:
        raise SizeCapError(
            f"joint action space has {size} profiles, above the cap of {cap}"
        )


def _distinct_count_contexts(game: GameInstance, skip: Optional[int]):
    """Deduplicated per-resource count vectors over all agents != skip."""
    m = game.num_resources
    seen = {}
    agents = [j for j in range(game.n) if j != skip]
    for combo in itertools.product(*(game.action_sets[j] for j in agents)):
        counts = [0] * m
        for act in combo:
            for r in act:
                counts[r] += 1
        seen.setdefault(tuple(counts), combo)
    return seen  # count tuple -> one representative profile of the others


def _distinct_base_contexts(game: GameInstance, skip: Optional[int]):
    seen = {}
    agents = [j for j in range(game.n) if j != skip]
    for combo in itertools.product(*(game.action_sets[j] for j in agents)):
        key = frozenset().union(*combo) if combo else frozenset()
        seen.setdefault(key, combo)
    return seen


def _dominates(big, small) -> bool:
    return all(b >= s for b, s in zip(big, small))


def check_submodular(game: GameInstance, cap: int = DEFAULT_CHECK_CAP) -> SubmodularityReport:
    """Exhaustively verify that the welfare is submodular, nondecreasing and
    normalized over the admissible profile space.

    Contexts are deduplicated by what the welfare actually depends on
    (per-resource counts for separable welfare, base sets for tabulated), and
    compared by count dominance resp. base-set inclusion. Returns a passing
    report or the first violating tuple; refuses games whose joint action
    space exceeds ``cap``.
    """
    _require_cap(game, cap)
    w0 = welfare_eval(game, empty_profile(game))
    if abs(w0) > TOLERANCE:
        return SubmodularityReport(
            ok=False,
            failure=CheckFinding(
                "normalization", f"W(empty) = {w0!r}, expected 0", {"value": w0}
            ),
            contexts_checked=0,
            pairs_checked=0,
        )

    separable = game.separable
    contexts_checked = 0
    pairs_checked = 0

    def value_of(counts_or_set, extra: Action) -> float:
        # welfare of a context plus one added action (count/multiset aware)
        if separable:
            counts = list(counts_or_set)
            for r in extra:
                counts[r] += 1
            curves = game.welfare.curves
            return sum(curves[r][counts[r]] for r in range(len(curves)))
        key = counts_or_set | extra
        table = _table_map(game.welfare)
        if key not in table:
            raise ModelIncompleteError(
                f"no welfare table entry for base set {sorted(key)}"
            )
        return table[key]

    def compare(small_key, big_key) -> bool:
        if separable:
            return _dominates(big_key, small_key)
        return small_key <= big_key

    # monotonicity over deduplicated full profiles
    full = _distinct_count_contexts(game, None) if separable else _distinct_base_contexts(game, None)
    keys = sorted(full, key=lambda k: (sum(k) if separable else len(k), sorted(k) if not separable else k))
    if len(keys) ** 2 > 4_000_000:
        raise SizeCapError(
            f"{len(keys)} distinct selections give too many comparable pairs"
        )
    try:
        values = {k: value_of(k, EMPTY_ACTION) for k in keys}
        contexts_checked += len(keys)
        for a_idx in range(len(keys)):
            for b_idx in range(len(keys)):
                ks, kb = keys[a_idx], keys[b_idx]
                if ks == kb or not compare(ks, kb):
                    continue
                pairs_checked += 1
                if values[ks] > values[kb] + TOLERANCE:
                    return SubmodularityReport(
                        ok=False,
                        failure=CheckFinding(
                            "monotonicity",
                            "welfare decreases on a larger selection",
                            {
                                "smaller": _describe_key(ks, separable),
                                "larger": _describe_key(kb, separable),
                                "smaller_value": values[ks],
                                "larger_value": values[kb],
                            },
                        ),
                        contexts_checked=contexts_checked,
                        pairs_checked=pairs_checked,
                    )

        # decreasing marginal returns, per agent and action
        for i in range(game.n):
            ctxs = (
                _distinct_count_contexts(game, i)
                if separable
                else _distinct_base_contexts(game, i)
            )
            ckeys = sorted(
                ctxs, key=lambda k: (sum(k) if separable else len(k), sorted(k) if not separable else k)
            )
            contexts_checked += len(ckeys)
            base_vals = {k: value_of(k, EMPTY_ACTION) for k in ckeys}
            for act in game.action_sets[i]:
                if not act:
                    continue
                margins = {k: value_of(k, act) - base_vals[k] for k in ckeys}
                for ks_i in range(len(ckeys)):
                    for kb_i in range(len(ckeys)):
                        ks, kb = ckeys[ks_i], ckeys[kb_i]
                        if ks == kb or not compare(ks, kb):
                            continue
                        pairs_checked += 1
                        if margins[ks] < margins[kb] - TOLERANCE:
                            return SubmodularityReport(
                                ok=False,
                                failure=CheckFinding(
                                    "submodularity",
                                    "marginal value grows with a larger context",
                                    {
                                        "agent": i,
                                        "action": sorted(act),
                                        "smaller_context": _describe_key(ks, separable),
                                        "larger_context": _describe_key(kb, separable),
                                        "margin_at_smaller": margins[ks],
                                        "margin_at_larger": margins[kb],
                                    },
                                ),
                                contexts_checked=contexts_checked,
                                pairs_checked=pairs_checked,
                            )
    except ModelIncompleteError as exc:
        return SubmodularityReport(
            ok=False,
            failure=CheckFinding("table-missing", str(exc), None),
            contexts_checked=contexts_checked,
            pairs_checked=pairs_checked,
        )

    return SubmodularityReport(
        ok=True, failure=None, contexts_checked=contexts_checked, pairs_checked=pairs_checked
    )


def _describe_key(key, separable: bool):
    if separable:
        return {"counts": list(key)}
    return {"base_set": sorted(key)}


def check_vug(
    game: GameInstance,
    cap: int = DEFAULT_CHECK_CAP,
    utility_fn: Optional[Callable] = None,
) -> VugReport:
    """Verify the valid-utility-game conditions for the assigned utilities.

    Checks, over every admissible profile, that each agent's utility is at
    least its marginal contribution and that utilities sum to at most the
    welfare; also reports whether the sum condition is tight everywhere
    (true for equal-share games). ``utility_fn(game, i, a)`` overrides the
    assigned utilities, which is how non-shipped designs can be probed.

    The welfare conditions are the embedded :func:`check_submodular` report.
    """
    _require_cap(game, cap)
    welfare_report = check_submodular(game, cap=cap)

    util = utility_fn if utility_fn is not None else designed_utility
    cond2_ok = True
    cond3_ok = True
    cond3_tight = True
    failure: Optional[CheckFinding] = None
    profiles = 0

    for a in all_profiles(game):
        profiles += 1
        w = welfare_eval(game, a)
        total = 0.0
        for i in range(game.n):
            u = util(game, i, a)
            total += u
            if cond2_ok and u < marginal_contribution(game, i, a) - TOLERANCE:
                cond2_ok = False
                if failure is None:
                    failure = CheckFinding(
                        "utility-below-marginal",
                        f"agent {i}'s utility is below its marginal contribution",
                        {
                            "agent": i,
                            "profile": [sorted(x) for x in a],
                            "utility": u,
                            "marginal": marginal_contribution(game, i, a),
                        },
                    )
        if total > w + TOLERANCE:
            cond3_ok = False
            cond3_tight = False
            if failure is None:
                failure = CheckFinding(
                    "utility-sum-exceeds-welfare",
                    "utilities sum above the welfare",
                    {
                        "profile": [sorted(x) for x in a],
                        "utility_sum": total,
                        "welfare": w,
                    },
                )
        elif abs(total - w) > TOLERANCE:
            cond3_tight = False

    ok = welfare_report.ok and cond2_ok and cond3_ok
    if failure is None and not welfare_report.ok:
        failure = welfare_report.failure
    return VugReport(
        ok=ok,
        welfare=welfare_report,
        utility_dominates_marginal=cond2_ok,
        utility_sum_bounded=cond3_ok,
        utility_sum_tight=cond3_tight,
        failure=failure,
        profiles_checked=profiles,
    )
