"""Long-run analysis of the memory chain a mechanism induces.

Fixing the true state of the world ``w``, a mechanism's memory state
evolves as a Markov chain with kernel ``Q^w`` (signal-averaged
transitions).  Everything asymptotic lives here: stationary/occupancy
distributions (including the reducible case, resolved from the initial
state via absorption probabilities), expected utility and loss, Monte
Carlo cross-checks, and the synchronized two-agent product chain used
for disagreement calculations.

Occupancy is always the Cesaro limit of time spent in each memory state,
which for a unichain is the stationary vector and in general is the
absorption-weighted mixture of the recurrent classes' stationaries.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .automata import UpdatingMechanism, expected_transition_matrix
from .errors import SolverError
from .signals import SignalModel

#: Tolerance for rows of a kernel handed to the chain solvers.
CHAIN_ROW_TOL = 1e-9
#: A computed occupancy vector must satisfy ``pi Q = pi`` this tightly.
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class Problem:
    """A decision problem: signal model, payoffs, and a prior.

    ``utilities[w]`` is the (strictly positive) payoff for taking action
    ``w`` when the state is ``w``; mismatches pay zero.  ``prior`` is a
    strictly positive distribution over states.
    """

    model: SignalModel
    utilities: np.ndarray
    prior: np.ndarray

    def __post_init__(self):
        utilities = np.asarray(self.utilities, dtype=np.float64)
        prior = np.asarray(self.prior, dtype=np.float64)
        n = self.model.n_states
        if utilities.shape != (n,):
            raise ValueError(f"need one utility per state, got shape {utilities.shape}")
        if prior.shape != (n,):
            raise ValueError(f"need one prior weight per state, got shape {prior.shape}")
        if not (utilities > 0).all():
            raise ValueError("utilities must be strictly positive")
        if not (prior > 0).all():
            raise ValueError("prior must be strictly positive")
        if abs(prior.sum() - 1.0) > 1e-12:
            raise ValueError(f"prior sums to {prior.sum()!r}, not 1")
        utilities.setflags(write=False)
        prior.setflags(write=False)
        object.__setattr__(self, "utilities", utilities)
        object.__setattr__(self, "prior", prior)

    @property
    def n_states(self) -> int:
        return self.model.n_states

    @property
    def total_level(self) -> float:
        """Payoff of an agent who always guesses right: ``sum_w u_w p_w``."""
        return float(self.utilities @ self.prior)

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "utilities": [float(x) for x in self.utilities],
            "prior": [float(x) for x in self.prior],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Problem":
        return cls(
            model=SignalModel.from_json(obj["model"]),
            utilities=np.asarray(obj["utilities"], dtype=np.float64),
            prior=np.asarray(obj["prior"], dtype=np.float64),
        )


def uniform_problem(model: SignalModel) -> Problem:
    """Unit payoffs and a uniform prior over the model's states."""
    n = model.n_states
    return Problem(
        model=model,
        utilities=np.ones(n),
        prior=np.full(n, 1.0 / n),
    )


@dataclass(frozen=True)
class StationaryProfile:
    """Occupancy of each memory state under each state of the world.

    ``occupancy[w]`` is the long-run fraction of time spent in each
    memory state when the truth is ``w``, started from the mechanism's
    initial state.
    """

    occupancy: np.ndarray

    def __post_init__(self):
        occupancy = np.asarray(self.occupancy, dtype=np.float64)
        if occupancy.ndim != 2:
            raise ValueError(f"occupancy must be (states, memory), got {occupancy.shape}")
        occupancy.setflags(write=False)
        object.__setattr__(self, "occupancy", occupancy)

    @property
    def n_states(self) -> int:
        return self.occupancy.shape[0]

    @property
    def m_size(self) -> int:
        return self.occupancy.shape[1]

    def to_json(self) -> dict:
        return {"occupancy": [[float(x) for x in row] for row in self.occupancy]}


def _check_kernel(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"kernel must be square, got {q.shape}")
    if (q < 0).any():
        raise ValueError("kernel entries must be nonnegative")
    gap = float(np.abs(q.sum(axis=1) - 1.0).max())
    if gap > CHAIN_ROW_TOL:
        raise ValueError(f"kernel rows must be stochastic; worst row off by {gap:.2e}")
    return q


def recurrent_classes(q: np.ndarray):
    """Split states into recurrent classes and transient states.

    Returns ``(classes, transient)`` where ``classes`` is a list of
    sorted index lists (the closed communicating classes, in order of
    their smallest member) and ``transient`` is a sorted list of the
    remaining states.
    """
    q = _check_kernel(q)
    support = q > 0.0
    n_comp, labels = connected_components(support, directed=True, connection="strong")
    closed = np.ones(n_comp, dtype=bool)
    rows, cols = np.nonzero(support)
    for r, c in zip(rows, cols):
        if labels[r] != labels[c]:
            closed[labels[r]] = False
    classes = []
    transient = []
    for comp in range(n_comp):
        members = np.flatnonzero(labels == comp)
        if closed[comp]:
            classes.append([int(i) for i in members])
        else:
            transient.extend(int(i) for i in members)
    classes.sort(key=lambda c: c[0])
    transient.sort()
    return classes, transient


def _stationary_on_class(q: np.ndarray, members) -> np.ndarray:
    """Stationary vector of ``q`` restricted to one closed class.

    Uses state-elimination (the subtraction-free Gaussian variant known
    from the Markov chain literature) rather than a plain linear solve:
    occupancies of strongly biased chains span many orders of magnitude,
    and elimination keeps componentwise relative accuracy where a
    replaced-row solve returns small negative garbage.
    """
    a = q[np.ix_(members, members)].copy()
    k = len(members)
    for j in range(k - 1, 0, -1):
        s = a[j, :j].sum()
        if not s > 0.0:
            raise SolverError(
                f"class member {members[j]} cannot reach the rest of its class"
            )
        a[:j, j] /= s
        a[:j, :j] += np.outer(a[:j, j], a[j, :j])
    pi = np.empty(k)
    pi[0] = 1.0
    for j in range(1, k):
        pi[j] = pi[:j] @ a[:j, j]
    pi /= pi.sum()
    return pi


def _absorption_weights(q: np.ndarray, classes, transient, initial: int) -> np.ndarray:
    """Probability of ending in each recurrent class, from ``initial``."""
    weights = np.zeros(len(classes))
    for c, members in enumerate(classes):
        if initial in members:
            weights[c] = 1.0
            return weights
    t_index = {m: i for i, m in enumerate(transient)}
    qtt = q[np.ix_(transient, transient)]
    lhs = np.eye(len(transient)) - qtt
    for c, members in enumerate(classes):
        rhs = q[np.ix_(transient, members)].sum(axis=1)
        try:
            hit = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"absorption system is singular: {exc}") from exc
        weights[c] = hit[t_index[initial]]
    if abs(weights.sum() - 1.0) > 1e-9:
        raise SolverError(
            "absorption probabilities do not sum to 1",
            residual=float(abs(weights.sum() - 1.0)),
        )
    return weights


def stationary(q: np.ndarray, initial: int = 0) -> np.ndarray:
    """Long-run occupancy of the chain ``q`` started at ``initial``.

    For a unichain this is the unique stationary distribution.  When
    several closed classes exist, each is weighted by the probability of
    being absorbed into it from the initial state, so the result is the
    Cesaro limit of the empirical occupancy, not a solution of a single
    eigenproblem.
    """
    q = _check_kernel(q)
    n = q.shape[0]
    if not 0 <= initial < n:
        raise ValueError(f"initial state {initial} out of range for {n} states")
    if (q > 0.0).all():
        pi = _stationary_on_class(q, list(range(n)))
        _check_residual(pi, q)
        return pi
    classes, transient = recurrent_classes(q)
    if len(classes) == 1 and not transient:
        pi = _stationary_on_class(q, classes[0])
        _check_residual(pi, q)
        return pi
    weights = _absorption_weights(q, classes, transient, initial)
    pi = np.zeros(n)
    for weight, members in zip(weights, classes):
        if weight > 0.0:
            pi[members] += weight * _stationary_on_class(q, members)
    _check_residual(pi, q)
    return pi


def _check_residual(pi: np.ndarray, q: np.ndarray) -> None:
    residual = float(np.abs(pi @ q - pi).max())
    if residual > RESIDUAL_TOL:
        raise SolverError("occupancy failed the fixed-point check", residual=residual)


def occupancy_profile(problem: Problem, mech: UpdatingMechanism) -> StationaryProfile:
    """Occupancy vector under every state of the world."""
    rows = [
        stationary(expected_transition_matrix(mech, problem.model, w), mech.initial_state)
        for w in range(problem.n_states)
    ]
    return StationaryProfile(occupancy=np.vstack(rows))


def optimal_decisions(problem: Problem, profile: StationaryProfile) -> np.ndarray:
    """Best action per memory state given the occupancy profile.

    Memory state ``m`` gets the action maximizing
    ``utilities[w] * prior[w] * occupancy[w, m]``; ties break toward the
    lowest state index.
    """
    score = (problem.utilities * problem.prior)[:, None] * profile.occupancy
    return np.argmax(score, axis=0).astype(np.int64)


def profile_utility(
    problem: Problem, profile: StationaryProfile, decision: np.ndarray
) -> float:
    """Expected long-run payoff of a decision rule under the profile."""
    decision = np.asarray(decision)
    total = 0.0
    for w in range(problem.n_states):
        own = profile.occupancy[w, decision == w].sum()
        total += problem.utilities[w] * problem.prior[w] * own
    return float(total)


def asymptotic_utility(problem: Problem, mech: UpdatingMechanism) -> float:
    """Long-run expected payoff of the mechanism with its own decisions."""
    profile = occupancy_profile(problem, mech)
    return profile_utility(problem, profile, mech.decision)


def utility_loss(problem: Problem, mech: UpdatingMechanism) -> float:
    """Shortfall against an agent who always matches the state."""
    return problem.total_level - asymptotic_utility(problem, mech)


# ---------------------------------------------------------------------------
# simulation cross-check
# ---------------------------------------------------------------------------


def monte_carlo_occupancy(
    problem: Problem,
    mech: UpdatingMechanism,
    w: int,
    steps: int,
    burn_in: int = 0,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Empirical memory occupancy and action frequencies from one long run.

    Simulates ``steps`` act/observe/transit periods under state ``w`` and
    tallies the memory state occupied in each period after the first
    ``burn_in``, plus the frequency of each action taken there.  Signals
    are drawn i.i.d. from the state's density.  Deterministic transition
    rows skip the inverse-CDF draw, which keeps long runs cheap for the
    ladder-style mechanisms.
    """
    if not 0 <= w < problem.n_states:
        raise ValueError(f"state {w} out of range")
    if not steps > burn_in >= 0:
        raise ValueError(
            f"need steps > burn_in >= 0, got steps={steps} burn_in={burn_in}"
        )
    rng = np.random.default_rng(seed)
    total = steps
    signals = rng.choice(mech.alphabet_size, size=total, p=problem.model.mass[w])
    uniforms = rng.random(total)

    deterministic: list[list[int | None]] = []
    cumulative: list[list[tuple]] = []
    for m in range(mech.m_size):
        det_row: list[int | None] = []
        cum_row: list[tuple] = []
        for s in range(mech.alphabet_size):
            row = mech.transition[m, s]
            top = int(np.argmax(row))
            det_row.append(top if row[top] >= 1.0 - 1e-12 else None)
            cum_row.append(tuple(np.cumsum(row)))
        deterministic.append(det_row)
        cumulative.append(cum_row)

    counts = np.zeros(mech.m_size)
    m = mech.initial_state
    last = mech.m_size - 1
    sig_list = signals.tolist()
    uni_list = uniforms.tolist()
    for t in range(total):
        if t >= burn_in:
            counts[m] += 1.0
        s = sig_list[t]
        jump = deterministic[m][s]
        if jump is None:
            jump = min(bisect_right(cumulative[m][s], uni_list[t]), last)
        m = jump
    occupancy = counts / (steps - burn_in)
    frequencies = np.zeros(problem.n_states)
    np.add.at(frequencies, mech.decision, occupancy)
    return occupancy, frequencies


# ---------------------------------------------------------------------------
# two agents watching the same signals
# ---------------------------------------------------------------------------


def joint_occupancy(
    problem: Problem,
    mech_a: UpdatingMechanism,
    mech_b: UpdatingMechanism,
    w: int,
) -> np.ndarray:
    """Long-run joint occupancy of two mechanisms fed identical signals.

    The pair evolves as one chain on memory-state pairs; the returned
    matrix has shape ``(mech_a.m_size, mech_b.m_size)`` and sums to 1.
    Because both agents react to the *same* draw each period, this is not
    the product of the marginal occupancies.
    """
    if not 0 <= w < problem.n_states:
        raise ValueError(f"state {w} out of range")
    model = problem.model
    if mech_a.alphabet_size != model.alphabet_size or (
        mech_b.alphabet_size != model.alphabet_size
    ):
        raise ValueError("both mechanisms must read the model's alphabet")
    ma, mb = mech_a.m_size, mech_b.m_size
    kernel = np.einsum(
        "s,msj,nsk->mnjk", model.mass[w], mech_a.transition, mech_b.transition
    ).reshape(ma * mb, ma * mb)
    start = mech_a.initial_state * mb + mech_b.initial_state
    return stationary(kernel, start).reshape(ma, mb)


def disagreement_probability(
    problem: Problem, mech_a: UpdatingMechanism, mech_b: UpdatingMechanism
) -> np.ndarray:
    """Long-run chance the two mechanisms act differently, per true state."""
    differ = (
        np.asarray(mech_a.decision)[:, None] != np.asarray(mech_b.decision)[None, :]
    )
    out = np.empty(problem.n_states)
    for w in range(problem.n_states):
        joint = joint_occupancy(problem, mech_a, mech_b, w)
        out[w] = joint[differ].sum()
    return out
