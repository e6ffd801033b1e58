"""Canonical instance families, seeded random games, and the instance file
format.

Every generator is deterministic: the same parameters (and seed, for the
random family) produce the same instance and the same serialized document,
byte for byte. Resource ids follow a fixed layout per family so enumeration
orders are reproducible.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .game import (
    EMPTY_ACTION,
    Compromise,
    GameInstance,
    SeparableWelfare,
    TabulatedWelfare,
    Utility,
    ValidationError,
)

__all__ = [
    "FamilyParams",
    "ParseError",
    "gen_k_blind",
    "gen_mc_blind",
    "gen_mc_noblind",
    "gen_sim_game",
    "gen_fig1",
    "gen_random_separable",
    "gen_family",
    "serialize",
    "parse",
    "FAMILY_NAMES",
]

FAMILY_NAMES = ("k_blind", "mc_blind", "mc_noblind", "sim", "fig1", "random")


class ParseError(ValueError):
    """An instance document is malformed or violates an invariant."""


@dataclass(frozen=True)
class FamilyParams:
    """Parameters selecting one member of a named instance family."""

    family: str
    n: int = 0
    k: int = 0
    labels: tuple = ()
    eps: float = 0.01
    delta: float = 0.01
    seed: int = 0
    values: tuple = ()
    max_resources: int = 4
    max_actions: int = 4

    def __post_init__(self):
        if self.family not in FAMILY_NAMES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.eps < 0 or self.delta < 0:
            raise ValueError("eps and delta must be nonnegative")
        if self.k > self.n and self.family != "fig1":
            raise ValueError("k must not exceed n")


def _step_curve(value: float, n: int) -> tuple:
    """A curve worth ``value`` once the resource is selected at all."""
    return (0.0,) + (float(value),) * n


def _labels_for(k: int, labels: Optional[Sequence]) -> tuple:
    if labels is None:
        return (Compromise.BLIND,) * k
    out = tuple(Compromise(l) for l in labels)
    if len(out) != k:
        raise ValueError(f"expected {k} labels, got {len(out)}")
    if any(l is Compromise.NORMAL for l in out):
        raise ValueError("compromise labels must not be 'normal'")
    return out


def gen_k_blind(
    n: int,
    k: int,
    eps: float,
    delta: float,
    labels: Optional[Sequence] = None,
) -> GameInstance:
    """Shared hub with private alternates, equal-share utilities.

    Resource 0 is a hub of value 1 reachable by everyone. Compromised agents
    0..k-1 own alternates worth 1-eps; uncompromised agents own alternates
    worth 1/n - delta, except agent n-1 which has no alternate (it is the
    designated hub occupant in the optimum, which makes the enumerated
    optimum equal 1 + (n-k-1)(1/n - delta) + k(1-eps) exactly). Compromise
    labels must be blind or isolated.
    """
    if not 0 <= k < n:
        raise ValueError("need 0 <= k < n")
    labs = _labels_for(k, labels)
    if any(l is Compromise.DISABLED for l in labs):
        raise ValueError("this family takes blind or isolated labels only")
    curves = [_step_curve(1.0, n)]
    for _ in range(k):
        curves.append(_step_curve(1.0 - eps, n))
    for _ in range(n - 1 - k):
        curves.append(_step_curve(1.0 / n - delta, n))
    action_sets = []
    for i in range(n):
        if i < n - 1:
            action_sets.append((EMPTY_ACTION, frozenset({0}), frozenset({i + 1})))
        else:
            action_sets.append((EMPTY_ACTION, frozenset({0})))
    compromise = list(labs) + [Compromise.NORMAL] * (n - k)
    return GameInstance(
        welfare=SeparableWelfare(curves=tuple(curves)),
        action_sets=tuple(action_sets),
        utilities=(Utility.EQUAL_SHARE,) * n,
        compromise=tuple(compromise),
    )


def gen_mc_blind(
    n: int,
    k: int,
    eps: float,
    labels: Optional[Sequence] = None,
) -> GameInstance:
    """One shared resource everyone can take, marginal-contribution
    utilities.

    The shared resource 0 is worth 1+eps; each compromised agent 0..k-1 also
    owns an alternate worth 1. Uncompromised agents can only take the shared
    resource or opt out, so once a compromised agent sits on it their
    marginal value there is zero. Worst equilibrium welfare is 1+eps against
    an optimum of k+1+eps (for k < n).
    """
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    labs = _labels_for(k, labels)
    if any(l is Compromise.DISABLED for l in labs):
        raise ValueError("this family takes blind or isolated labels only")
    curves = [_step_curve(1.0 + eps, n)]
    for _ in range(k):
        curves.append(_step_curve(1.0, n))
    action_sets = []
    for i in range(n):
        if i < k:
            action_sets.append((EMPTY_ACTION, frozenset({0}), frozenset({i + 1})))
        else:
            action_sets.append((EMPTY_ACTION, frozenset({0})))
    compromise = list(labs) + [Compromise.NORMAL] * (n - k)
    return GameInstance(
        welfare=SeparableWelfare(curves=tuple(curves)),
        action_sets=tuple(action_sets),
        utilities=(Utility.MARGINAL_CONTRIBUTION,) * n,
        compromise=tuple(compromise),
    )


def gen_mc_noblind(n: int, k: int, eps: float) -> GameInstance:
    """All-isolated marginal-contribution family with shadowed resources.

    Each isolated agent j < k exclusively shares a 1+eps resource with one
    uncompromised "shadow" agent, who also owns a private alternate worth 1;
    the remaining uncompromised agents each own a private resource worth eps.
    In the worst equilibrium the shadows duplicate the occupied shared
    resources (they cannot see the isolated agents), so its welfare is
    k(1+eps) + (#remaining)·eps. The family's limiting ratio is reported, not
    asserted: with s = min(k, n-k-1) shadows it measures k/(k+s) as eps -> 0.
    """
    if k < 1 or n < k + 2:
        raise ValueError("need k >= 1 and n >= k + 2")
    s = min(k, n - k - 1)
    r = n - k - s
    curves = [_step_curve(1.0 + eps, n) for _ in range(k)]
    curves += [_step_curve(1.0, n) for _ in range(s)]
    curves += [_step_curve(eps, n) for _ in range(r)]
    action_sets = []
    for j in range(k):  # isolated agents
        action_sets.append((EMPTY_ACTION, frozenset({j})))
    for j in range(s):  # shadows: the shared resource plus an alternate
        action_sets.append((EMPTY_ACTION, frozenset({j}), frozenset({k + j})))
    for j in range(r):  # remaining agents
        action_sets.append((EMPTY_ACTION, frozenset({k + s + j})))
    compromise = (Compromise.ISOLATED,) * k + (Compromise.NORMAL,) * (n - k)
    return GameInstance(
        welfare=SeparableWelfare(curves=tuple(curves)),
        action_sets=tuple(action_sets),
        utilities=(Utility.MARGINAL_CONTRIBUTION,) * n,
        compromise=compromise,
    )


def gen_sim_game(
    n: int,
    k: int,
    eps: float,
    labels: Optional[Sequence] = None,
) -> GameInstance:
    """The hub family tuned for learning experiments: one normal agent.

    Same layout as :func:`gen_k_blind` with k = n-1, but the compromised
    agents' alternates are worth 1-eps, the single uncompromised agent's
    alternate is worth eps, and every agent uses the marginal-contribution
    utility. At (n=10, k=9, eps=0.05) the optimum is 1 + 9(1-eps) = 9.55.
    """
    if k != n - 1:
        raise ValueError("this family has exactly one uncompromised agent (k = n-1)")
    labs = _labels_for(k, labels)
    if any(l is Compromise.DISABLED for l in labs):
        raise ValueError("this family takes blind or isolated labels only")
    curves = [_step_curve(1.0, n)]
    curves += [_step_curve(1.0 - eps, n) for _ in range(k)]
    curves.append(_step_curve(eps, n))
    action_sets = []
    for i in range(k):
        action_sets.append((EMPTY_ACTION, frozenset({0}), frozenset({i + 1})))
    action_sets.append((EMPTY_ACTION, frozenset({0}), frozenset({k + 1})))
    compromise = list(labs) + [Compromise.NORMAL]
    return GameInstance(
        welfare=SeparableWelfare(curves=tuple(curves)),
        action_sets=tuple(action_sets),
        utilities=(Utility.MARGINAL_CONTRIBUTION,) * n,
        compromise=tuple(compromise),
    )


def gen_fig1(
    values: Sequence,
    labels: Optional[Sequence] = None,
) -> GameInstance:
    """Five agents, one private resource each plus one shared fallback.

    ``values`` are the six resource values; agent i can take its own resource
    i or resource 5. ``labels`` (length 3, blind/isolated/disabled) apply to
    agents 2, 3 and 4; by default nobody is compromised. Marginal-contribution
    utilities.
    """
    vals = tuple(float(v) for v in values)
    if len(vals) != 6:
        raise ValueError("exactly six resource values are required")
    if any(v < 0 for v in vals):
        raise ValueError("resource values must be nonnegative")
    if labels is None:
        labs = (Compromise.NORMAL,) * 3
    else:
        labs = tuple(Compromise(l) for l in labels)
        if len(labs) != 3:
            raise ValueError("labels apply to agents 2, 3, 4 (need three)")
    curves = tuple(_step_curve(v, 5) for v in vals)
    action_sets = tuple(
        (EMPTY_ACTION, frozenset({i}), frozenset({5})) for i in range(5)
    )
    compromise = (Compromise.NORMAL, Compromise.NORMAL) + labs
    return GameInstance(
        welfare=SeparableWelfare(curves=curves),
        action_sets=action_sets,
        utilities=(Utility.MARGINAL_CONTRIBUTION,) * 5,
        compromise=compromise,
    )


def gen_random_separable(
    n: int,
    max_resources: int,
    max_actions: int,
    k: int = 0,
    labels: Optional[Sequence] = None,
    seed: int = 0,
    utility_choices: Sequence = (Utility.MARGINAL_CONTRIBUTION, Utility.EQUAL_SHARE),
) -> GameInstance:
    """Seeded random separable game; always a valid utility game.

    Curves are built from per-count increments drawn on a 0.01 grid and
    sorted descending, which guarantees concavity by construction. Every
    agent gets the opt-out plus at least one nonempty action. The first
    ``k`` labels are placed on seed-chosen agents.
    """
    if n < 1 or max_resources < 1 or max_actions < 2:
        raise ValueError("need n >= 1, max_resources >= 1, max_actions >= 2")
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    labs = _labels_for(k, labels) if (labels is not None or k) else ()
    rng = random.Random(seed)
    m = rng.randint(1, max_resources)
    curves = []
    for _ in range(m):
        increments = sorted(
            (round(rng.uniform(0.01, 1.0), 2) for _ in range(n)), reverse=True
        )
        curve = [0.0]
        for inc in increments:
            curve.append(curve[-1] + inc)
        curves.append(tuple(curve))
    action_sets = []
    for _ in range(n):
        want = rng.randint(1, max_actions - 1)
        acts = set()
        for _ in range(4 * want):
            if len(acts) >= want:
                break
            size = 1 if (m == 1 or rng.random() < 0.7) else 2
            acts.add(frozenset(rng.sample(range(m), size)))
        action_sets.append(tuple(sorted(acts, key=lambda a: (len(a), sorted(a)))))
    utilities = tuple(Utility(rng.choice(tuple(utility_choices))) for _ in range(n))
    compromise = [Compromise.NORMAL] * n
    for pos, lab in zip(sorted(rng.sample(range(n), k)), labs):
        compromise[pos] = lab
    return GameInstance(
        welfare=SeparableWelfare(curves=tuple(curves)),
        action_sets=tuple(action_sets),
        utilities=utilities,
        compromise=tuple(compromise),
    )


def gen_family(params: FamilyParams) -> GameInstance:
    """Dispatch a FamilyParams to its generator."""
    f = params.family
    if f == "k_blind":
        return gen_k_blind(params.n, params.k, params.eps, params.delta, params.labels or None)
    if f == "mc_blind":
        return gen_mc_blind(params.n, params.k, params.eps, params.labels or None)
    if f == "mc_noblind":
        return gen_mc_noblind(params.n, params.k, params.eps)
    if f == "sim":
        return gen_sim_game(params.n, params.k, params.eps, params.labels or None)
    if f == "fig1":
        return gen_fig1(params.values, params.labels or None)
    if f == "random":
        return gen_random_separable(
            params.n,
            params.max_resources,
            params.max_actions,
            params.k,
            params.labels or None,
            params.seed,
        )
    raise ValueError(f"unknown family {f!r}")


# ---------------------------------------------------------------------------
# instance file format


def serialize(game: GameInstance) -> str:
    """Render a game as the JSON instance document (lossless round trip).

    The empty opt-out action is implicit and not written; action sets are
    already canonically ordered, so repeated serialization of equal games is
    byte-identical.
    """
    doc = {"n": game.n}
    if game.separable:
        doc["resources"] = [
            {"id": r, "curve": list(curve)}
            for r, curve in enumerate(game.welfare.curves)
        ]
    else:
        doc["resources"] = [{"id": r} for r in range(game.num_resources)]
        doc["table"] = [
            {"subset": sorted(subset), "value": value}
            for subset, value in game.welfare.entries
        ]
    doc["action_sets"] = [
        [sorted(a) for a in acts if a] for acts in game.action_sets
    ]
    doc["utility"] = [u.value for u in game.utilities]
    doc["compromise"] = [c.value for c in game.compromise]
    return json.dumps(doc, indent=2) + "\n"


def _expect(doc: dict, key: str, where: str):
    if key not in doc:
        raise ParseError(f"{where}: missing required field {key!r}")
    return doc[key]


def parse(document: str) -> GameInstance:
    """Parse and validate an instance document.

    Raises ParseError with the offending location for malformed documents;
    game-invariant violations (bad curves, unknown resource ids, inadmissible
    utilities) surface as ParseError too, naming the culprit.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    n = _expect(doc, "n", "document")
    if not isinstance(n, int) or n < 1:
        raise ParseError("field 'n' must be a positive integer")
    resources = _expect(doc, "resources", "document")
    if not isinstance(resources, list) or not resources:
        raise ParseError("field 'resources' must be a nonempty list")
    ids = [entry.get("id") for entry in resources]
    if ids != list(range(len(resources))):
        raise ParseError("resource ids must be contiguous from 0")

    if "table" in doc:
        table = {}
        for idx, entry in enumerate(doc["table"]):
            subset = entry.get("subset")
            value = entry.get("value")
            if not isinstance(subset, list) or not isinstance(value, (int, float)):
                raise ParseError(f"table entry {idx}: need 'subset' list and numeric 'value'")
            key = frozenset(subset)
            if key in table:
                raise ParseError(f"table entry {idx}: duplicate subset {sorted(key)}")
            table[key] = float(value)
        welfare = TabulatedWelfare.from_mapping(table, len(resources))
    else:
        curves = []
        for entry in resources:
            curve = entry.get("curve")
            if not isinstance(curve, list):
                raise ParseError(f"resource {entry.get('id')}: missing value curve")
            curves.append(tuple(float(v) for v in curve))
        welfare = SeparableWelfare(curves=tuple(curves))

    raw_sets = _expect(doc, "action_sets", "document")
    if not isinstance(raw_sets, list) or len(raw_sets) != n:
        raise ParseError(f"'action_sets' must list actions for all {n} agents")
    action_sets = []
    for i, acts in enumerate(raw_sets):
        if not isinstance(acts, list):
            raise ParseError(f"agent {i}: action set must be a list")
        parsed = [EMPTY_ACTION]
        for a in acts:
            if not isinstance(a, list) or not all(isinstance(r, int) for r in a):
                raise ParseError(f"agent {i}: actions must be lists of resource ids")
            parsed.append(frozenset(a))
        action_sets.append(tuple(parsed))

    utility = _expect(doc, "utility", "document")
    compromise = _expect(doc, "compromise", "document")
    if len(utility) != n or len(compromise) != n:
        raise ParseError("'utility' and 'compromise' must have one entry per agent")
    try:
        utilities = tuple(Utility(u) for u in utility)
        labels = tuple(Compromise(c) for c in compromise)
    except ValueError as exc:
        raise ParseError(str(exc)) from None

    try:
        return GameInstance(
            welfare=welfare,
            action_sets=tuple(action_sets),
            utilities=utilities,
            compromise=labels,
        )
    except (ValidationError, ValueError) as exc:
        raise ParseError(str(exc)) from None
