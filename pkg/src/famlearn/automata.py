"""Bounded-memory updating mechanisms and the standard constructions.

An :class:`UpdatingMechanism` is a finite automaton over ``m_size`` memory
states: on receiving signal ``s`` in memory state ``m`` it moves to ``m2``
with probability ``transition[m, s, m2]``, and in each memory state it
takes the (deterministic) action ``decision[m]``.  The rule is stationary:
the same tensor applies at every period, which is what makes long-run
behavior a Markov chain question (see :mod:`famlearn.chain`).

Builders provided here:

* :func:`build_line` — a deterministic birth-death ladder for two states
  of the world: step up on signals favoring state 0, down otherwise.
* :func:`build_star` — a hub-and-spokes automaton: a central undecided
  state plus one branch of ``lam`` confidence levels per action.  Signals
  are first passed through confirmation lotteries; own-branch confirmation
  moves the agent outward, contradicting confirmation moves it inward but
  only with probability ``1/delta`` (underreaction), which is exactly what
  drives own-branch occupancy to 1 as ``lam`` grows.
* :func:`build_noisy_star` — the same with probability ``gamma`` of a
  purely local random slip each period.
* :func:`build_symmetric_full` / :func:`build_symmetric_ignorant` — the
  one-memory-state-per-action design versus the design that spends two
  confidence levels on each of half the actions and ignores the rest,
  both over the symmetric alphabet where the true state's own signal is
  ``info`` times as likely as any other.

All indices (memory states, signals, actions) are 0-based, in code and in
JSON.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StarConditionError
from .signals import (
    Lottery,
    SignalModel,
    confirmatory_lotteries,
    expected_lottery_mass,
)

#: Transition rows must sum to 1 within this tolerance.
TRANSITION_ROW_TOL = 1e-12

BLUEPRINT_FAMILIES = (
    "line",
    "star",
    "noisy_star",
    "symmetric_full",
    "symmetric_ignorant",
)


@dataclass(frozen=True)
class UpdatingMechanism:
    """A stationary memory-update rule plus a deterministic decision rule.

    ``transition`` has shape ``(m_size, alphabet_size, m_size)``; each
    ``transition[m, s]`` row is a probability vector over successor memory
    states.  ``decision[m]`` is the action index taken while in ``m``
    (actions are state-of-the-world indices).  ``initial_state`` matters
    only when the induced chain is reducible, but is always carried so
    runs are reproducible.
    """

    m_size: int
    transition: np.ndarray
    decision: np.ndarray
    initial_state: int = 0

    def __post_init__(self):
        transition = np.asarray(self.transition, dtype=np.float64)
        decision = np.asarray(self.decision, dtype=np.int64)
        if transition.ndim != 3 or transition.shape[0] != transition.shape[2]:
            raise ValueError(
                f"transition must have shape (m, s, m), got {transition.shape}"
            )
        if self.m_size != transition.shape[0]:
            raise ValueError(
                f"m_size={self.m_size} does not match tensor {transition.shape}"
            )
        if decision.shape != (self.m_size,):
            raise ValueError(
                f"decision must have one action per memory state, got {decision.shape}"
            )
        if (decision < 0).any():
            raise ValueError("decision entries must be nonnegative action indices")
        if not 0 <= self.initial_state < self.m_size:
            raise ValueError(f"initial_state {self.initial_state} out of range")
        if (transition < 0).any():
            raise ValueError("transition probabilities must be nonnegative")
        row_sums = transition.sum(axis=2)
        worst = float(np.abs(row_sums - 1.0).max())
        if worst > TRANSITION_ROW_TOL:
            bad = np.unravel_index(int(np.abs(row_sums - 1.0).argmax()), row_sums.shape)
            raise ValueError(
                f"transition row (m={bad[0]}, s={bad[1]}) sums to "
                f"{row_sums[bad]!r}, off by {worst:.2e}"
            )
        transition.setflags(write=False)
        decision.setflags(write=False)
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "decision", decision)

    @property
    def alphabet_size(self) -> int:
        return self.transition.shape[1]

    def to_json(self) -> dict:
        return {
            "m": self.m_size,
            "transition": [
                [[float(x) for x in row] for row in per_signal]
                for per_signal in self.transition
            ],
            "decision": [int(a) for a in self.decision],
            "initial": int(self.initial_state),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "UpdatingMechanism":
        return cls(
            m_size=int(obj["m"]),
            transition=np.asarray(obj["transition"], dtype=np.float64),
            decision=np.asarray(obj["decision"], dtype=np.int64),
            initial_state=int(obj.get("initial", 0)),
        )


@dataclass(frozen=True)
class MechanismBlueprint:
    """A buildable description of a mechanism family plus its parameters.

    ``family`` is one of ``line``, ``star``, ``noisy_star``,
    ``symmetric_full``, ``symmetric_ignorant``.  ``params`` carries the
    family's knobs: ``m_size`` (line), ``lam``/``delta`` (star families,
    ``delta > 1``), ``gamma`` (noisy star), ``n``/``info``/``delta``
    (symmetric families, ``delta < 1``).  Blueprints exist so experiment
    files can name a construction instead of shipping a tensor.
    """

    family: str
    params: dict

    def __post_init__(self):
        if self.family not in BLUEPRINT_FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}; expected one of {BLUEPRINT_FAMILIES}"
            )
        object.__setattr__(self, "params", dict(self.params))

    def to_json(self) -> dict:
        return {"family": self.family, "params": dict(sorted(self.params.items()))}

    @classmethod
    def from_json(cls, obj: dict) -> "MechanismBlueprint":
        return cls(family=str(obj["family"]), params=dict(obj.get("params", {})))


def expected_transition_matrix(
    mech: UpdatingMechanism, model: SignalModel, w: int
) -> np.ndarray:
    """Signal-averaged one-period kernel ``Q^w`` when the true state is ``w``."""
    if model.alphabet_size != mech.alphabet_size:
        raise ValueError(
            f"alphabet mismatch: model has {model.alphabet_size} signals, "
            f"mechanism expects {mech.alphabet_size}"
        )
    return np.einsum("s,msn->mn", model.mass[w], mech.transition)


def step(mech: UpdatingMechanism, m: int, s: int, rng: np.random.Generator):
    """One period: act in ``m``, then transit on signal ``s``.

    Returns ``(action, next_memory_state)``; the action is the one taken
    *before* the update, matching the within-period timeline.
    """
    if not 0 <= m < mech.m_size:
        raise ValueError(f"memory state {m} out of range")
    if not 0 <= s < mech.alphabet_size:
        raise ValueError(f"signal {s} out of range")
    action = int(mech.decision[m])
    nxt = int(rng.choice(mech.m_size, p=mech.transition[m, s]))
    return action, nxt


# ---------------------------------------------------------------------------
# line (birth-death ladder) for two states of the world
# ---------------------------------------------------------------------------


def build_line(model: SignalModel, m_size: int) -> UpdatingMechanism:
    """Deterministic ladder: up on signals where state 0 is likelier.

    Signals with ``mass[0][s] > mass[1][s]`` move one memory state up
    (saturating at the top), all others — including exact ties, which
    carry no information — move one state down (saturating at the
    bottom).  The lower half of the ladder decides action 1, the upper
    half action 0.
    """
    if model.n_states != 2:
        raise ValueError(f"line mechanism needs exactly 2 states, got {model.n_states}")
    if m_size < 2:
        raise ValueError(f"line mechanism needs m_size >= 2, got {m_size}")
    up = model.mass[0] > model.mass[1]
    transition = np.zeros((m_size, model.alphabet_size, m_size))
    for m in range(m_size):
        hi = min(m + 1, m_size - 1)
        lo = max(m - 1, 0)
        for s in range(model.alphabet_size):
            transition[m, s, hi if up[s] else lo] += 1.0
    decision = np.array([1] * (m_size // 2) + [0] * (m_size - m_size // 2))
    return UpdatingMechanism(
        m_size=m_size, transition=transition, decision=decision, initial_state=0
    )


# ---------------------------------------------------------------------------
# star and noisy star
# ---------------------------------------------------------------------------


def _confirmation_matrix(model: SignalModel, lotteries: list[Lottery]) -> np.ndarray:
    """``F[w, w2]`` = chance lottery ``w2`` confirms when the state is ``w``."""
    n = model.n_states
    out = np.empty((n, n))
    for w in range(n):
        for w2 in range(n):
            out[w, w2] = expected_lottery_mass(model, w, lotteries[w2])
    return out


def check_star_condition(
    model: SignalModel, delta: float, lotteries: list[Lottery]
) -> None:
    """Raise unless every branch drifts outward under every true state.

    The requirement is ``delta * F^w(S^w2) > sum_{w3 != w2} F^w(S^w3)``
    for all ``(w, w2)``: even the least-confirmed branch must beat the
    dampened inward pull, otherwise the geometric occupancy profile
    breaks down.
    """
    F = _confirmation_matrix(model, lotteries)
    totals = F.sum(axis=1)
    for w in range(model.n_states):
        for w2 in range(model.n_states):
            other = totals[w] - F[w, w2]
            ratio = np.inf if other == 0 else delta * F[w, w2] / other
            if not ratio > 1.0:
                raise StarConditionError(w, w2, float(ratio), float(delta))


def minimal_star_delta(
    model: SignalModel, lotteries: list[Lottery] | None = None, safety: float = 2.0
) -> float:
    """Smallest feasible underreaction scale, padded by ``safety``.

    Returns ``safety`` times the infimum ``delta`` satisfying the star
    drift condition (and never less than ``safety`` itself, since the
    construction needs ``delta > 1``).
    """
    if lotteries is None:
        lotteries = confirmatory_lotteries(model)
    F = _confirmation_matrix(model, lotteries)
    totals = F.sum(axis=1)
    needed = 1.0
    for w in range(model.n_states):
        for w2 in range(model.n_states):
            other = totals[w] - F[w, w2]
            if F[w, w2] > 0:
                needed = max(needed, other / F[w, w2])
    return safety * needed


def _star_layout(n_states: int, lam: int, m_size: int | None):
    core = n_states * lam + 1
    if m_size is None:
        m_size = core
    if m_size < core:
        raise ValueError(f"m_size={m_size} cannot hold {n_states} branches of depth {lam}")
    return core, m_size


def _branch_state(branch: int, depth: int, lam: int) -> int:
    """Memory index of the given branch/depth; the center is index 0."""
    return 1 + branch * lam + (depth - 1)


def build_star(
    model: SignalModel,
    lam: int,
    delta: float,
    lotteries: list[Lottery] | None = None,
    m_size: int | None = None,
) -> UpdatingMechanism:
    """Hub automaton with one confidence branch per action.

    From the center, the agent enters branch ``w`` whenever lottery ``w``
    confirms.  Inside branch ``w`` at depth ``k``, own confirmation moves
    one step outward (absorbed into staying at the tip), any other
    branch's confirmation moves one step inward with probability
    ``1/delta``, and otherwise the agent stays put.  Branch states decide
    their branch's action; the center (whose long-run weight vanishes as
    ``lam`` grows) is pinned to action 0 to keep decisions deterministic.
    Memory states beyond the ``n*lam + 1`` core, if any, self-loop and are
    never entered from the center.
    """
    if lam < 1:
        raise ValueError(f"branch depth must be >= 1, got {lam}")
    if not delta > 1.0:
        raise ValueError(f"star mechanisms need delta > 1, got {delta}")
    if model.n_states < 2:
        raise ValueError("star mechanism needs at least 2 states of the world")
    if lotteries is None:
        lotteries = confirmatory_lotteries(model)
    if len(lotteries) != model.n_states:
        raise ValueError(
            f"need one lottery per state: {len(lotteries)} != {model.n_states}"
        )
    check_star_condition(model, delta, lotteries)

    n, alphabet = model.n_states, model.alphabet_size
    core, m_size = _star_layout(n, lam, m_size)
    S = np.vstack([lot.weights for lot in lotteries])  # (n, alphabet)
    col_total = S.sum(axis=0)
    if col_total.max() > 1.0 + TRANSITION_ROW_TOL:
        raise ValueError("lottery weights exceed 1 on some signal; cannot branch")

    transition = np.zeros((m_size, alphabet, m_size))
    for s in range(alphabet):
        transition[0, s, 0] = 1.0 - col_total[s]
        for i in range(n):
            transition[0, s, _branch_state(i, 1, lam)] += S[i, s]
    for i in range(n):
        for k in range(1, lam + 1):
            u = _branch_state(i, k, lam)
            inward = _branch_state(i, k - 1, lam) if k >= 2 else 0
            for s in range(alphabet):
                up_mass = S[i, s]
                down_mass = (col_total[s] - S[i, s]) / delta
                stay = 1.0 - down_mass
                if k < lam:
                    transition[u, s, _branch_state(i, k + 1, lam)] += up_mass
                    stay -= up_mass
                transition[u, s, inward] += down_mass
                transition[u, s, u] += stay
    for m in range(core, m_size):
        transition[m, :, m] = 1.0

    decision = np.zeros(m_size, dtype=np.int64)
    for i in range(n):
        for k in range(1, lam + 1):
            decision[_branch_state(i, k, lam)] = i
    return UpdatingMechanism(
        m_size=m_size, transition=transition, decision=decision, initial_state=0
    )


def build_noisy_star(
    model: SignalModel,
    lam: int,
    delta: float,
    gamma: float,
    lotteries: list[Lottery] | None = None,
    m_size: int | None = None,
) -> UpdatingMechanism:
    """Star mechanism with probability ``gamma`` of a local random slip.

    Each period, with probability ``1 - gamma`` the star rule applies;
    with probability ``gamma`` the agent instead moves to a uniformly
    chosen neighbor: the center slips into a random branch's first level,
    a first-level state slips half up / half back to the center, interior
    states slip half a level either way, and a tip slips one level inward
    (for ``lam == 1`` a branch state is a tip, so it slips to the center).
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    base = build_star(model, lam, delta, lotteries=lotteries, m_size=m_size)
    n = model.n_states
    core, m_size = _star_layout(n, lam, base.m_size)

    slip = np.zeros((m_size, m_size))
    for i in range(n):
        slip[0, _branch_state(i, 1, lam)] += 1.0 / n
    for i in range(n):
        for k in range(1, lam + 1):
            u = _branch_state(i, k, lam)
            if k == lam:
                slip[u, _branch_state(i, k - 1, lam) if k >= 2 else 0] = 1.0
            elif k == 1:
                slip[u, _branch_state(i, 2, lam)] = 0.5
                slip[u, 0] = 0.5
            else:
                slip[u, _branch_state(i, k + 1, lam)] = 0.5
                slip[u, _branch_state(i, k - 1, lam)] = 0.5
    for m in range(core, m_size):
        slip[m, m] = 1.0

    transition = (1.0 - gamma) * base.transition + gamma * slip[:, None, :]
    return UpdatingMechanism(
        m_size=m_size,
        transition=transition,
        decision=base.decision,
        initial_state=0,
    )


# ---------------------------------------------------------------------------
# symmetric families (one signal per state, own signal `info` times likelier)
# ---------------------------------------------------------------------------


def symmetric_model(n: int, info: float) -> SignalModel:
    """Alphabet of one signal per state; own signal ``info`` times likelier."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not info > 1.0:
        raise ValueError(f"informativeness must exceed 1, got {info}")
    base = 1.0 / (n + info - 1.0)
    mass = np.full((n, n), base)
    np.fill_diagonal(mass, info * base)
    return SignalModel(n_states=n, alphabet_size=n, mass=mass)


def build_symmetric_full(n: int, info: float, delta: float):
    """One memory state per action; jump to the signaled action w.p. ``delta``.

    Returns ``(mechanism, model)`` over the symmetric alphabet.  The
    long-run correct-action probability works out to
    ``info / (n + info - 1)`` under every state, independent of ``delta``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"symmetric family needs 0 < delta < 1, got {delta}")
    model = symmetric_model(n, info)
    transition = np.zeros((n, n, n))
    for m in range(n):
        for s in range(n):
            transition[m, s, s] += delta
            transition[m, s, m] += 1.0 - delta
    mech = UpdatingMechanism(
        m_size=n,
        transition=transition,
        decision=np.arange(n),
        initial_state=0,
    )
    return mech, model


def build_symmetric_ignorant(n: int, info: float, delta: float):
    """Two confidence levels for each of the first ``n/2`` actions.

    Returns ``(mechanism, model)``.  Action ``a < n/2`` owns memory states
    ``2a`` (doubting) and ``2a + 1`` (confident).  Own-action signals
    promote; rival considered-action signals demote the confident state or
    switch the doubting state to the rival's doubting state, each with
    probability ``delta``; signals for the ignored half of the actions
    change nothing.  Actions ``a >= n/2`` are never taken.
    """
    if n < 4 or n % 2:
        raise ValueError(f"ignorant design needs an even n >= 4, got {n}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"symmetric family needs 0 < delta < 1, got {delta}")
    model = symmetric_model(n, info)
    half = n // 2
    transition = np.zeros((n, n, n))
    decision = np.zeros(n, dtype=np.int64)
    for a in range(half):
        lo, hi = 2 * a, 2 * a + 1
        decision[lo] = decision[hi] = a
        for s in range(n):
            if s == a:
                transition[hi, s, hi] += 1.0
                transition[lo, s, hi] += 1.0
            elif s < half:
                transition[hi, s, lo] += delta
                transition[hi, s, hi] += 1.0 - delta
                transition[lo, s, 2 * s] += delta
                transition[lo, s, lo] += 1.0 - delta
            else:
                transition[hi, s, hi] += 1.0
                transition[lo, s, lo] += 1.0
    mech = UpdatingMechanism(
        m_size=n, transition=transition, decision=decision, initial_state=0
    )
    return mech, model


# ---------------------------------------------------------------------------
# blueprints
# ---------------------------------------------------------------------------


def build_from_blueprint(
    blueprint: MechanismBlueprint, model: SignalModel | None = None
):
    """Realize a blueprint; returns ``(mechanism, model)``.

    The line and star families require the caller's ``model``; the
    symmetric families generate their own and reject a supplied one so a
    mismatch cannot pass silently.
    """
    fam, p = blueprint.family, blueprint.params
    if fam in ("line", "star", "noisy_star"):
        if model is None:
            raise ValueError(f"family {fam!r} needs a signal model")
        if fam == "line":
            return build_line(model, int(p["m_size"])), model
        lam = int(p["lam"])
        delta = float(p["delta"])
        m_size = int(p["m_size"]) if "m_size" in p else None
        if fam == "star":
            return build_star(model, lam, delta, m_size=m_size), model
        return (
            build_noisy_star(model, lam, delta, float(p["gamma"]), m_size=m_size),
            model,
        )
    if model is not None:
        raise ValueError(f"family {fam!r} generates its own model; do not pass one")
    n = int(p["n"])
    info = float(p["info"])
    delta = float(p["delta"])
    if fam == "symmetric_full":
        return build_symmetric_full(n, info, delta)
    return build_symmetric_ignorant(n, info, delta)
