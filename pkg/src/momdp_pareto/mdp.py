"""Finite discounted multi-objective MDPs: representation, evaluation, planning."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

# Conventions used throughout the package:
#   - a deterministic policy is an int array of shape (S,), one action per state
#   - a stochastic policy is a row-stochastic float array of shape (S, A)
#   - value functions have shape (S, D), long-term returns shape (D,)


class InvalidMdpError(ValueError):
    """Raised when an operation is handed an MDP that fails validation."""

    def __init__(self, violations: Sequence[str]):
        super().__init__("invalid MDP: " + "; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class Mdp:
    """A tabular multi-objective MDP.

    Attributes:
        P: transition tensor of shape (S, A, S); P[s, a, t] is the probability
            of moving to state t when playing action a in state s.
        r: reward tensor of shape (S, A, D) with one reward per objective.
        gamma: discount factor in [0, 1).
        mu: initial state distribution of shape (S,); every entry must be
            positive so that all states contribute to the long-term return.
    """

    P: np.ndarray
    r: np.ndarray
    gamma: float
    mu: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        r = np.asarray(self.r, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ValueError(f"P must have shape (S, A, S), got {P.shape}")
        if r.ndim != 3 or r.shape[:2] != P.shape[:2]:
            raise ValueError(
                f"r must have shape (S, A, D) matching P, got {r.shape} vs {P.shape}"
            )
        if mu.shape != (P.shape[0],):
            raise ValueError(f"mu must have shape ({P.shape[0]},), got {mu.shape}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "mu", mu)

    @property
    def num_states(self) -> int:
        return self.P.shape[0]

    @property
    def num_actions(self) -> int:
        return self.P.shape[1]

    @property
    def num_objectives(self) -> int:
        return self.r.shape[2]


def validate_mdp(mdp: Mdp, atol: float = 1e-12) -> list[str]:
    """Check the numerical invariants of an MDP.

    Structural problems (wrong array ranks) are rejected by the Mdp
    constructor; this checks the value-level constraints and reports every
    violation it finds, naming the offending field and index.

    Args:
        mdp: the MDP to check.
        atol: tolerance for the row-sum and mu normalization checks.

    Returns:
        A list of human-readable violation strings, empty when the MDP is valid.
    """
    violations: list[str] = []
    if not np.isfinite(mdp.P).all():
        for s, a in zip(*np.nonzero(~np.isfinite(mdp.P).all(axis=2))):
            violations.append(f"P[{s}][{a}] contains non-finite entries")
    if not np.isfinite(mdp.r).all():
        for s, a in zip(*np.nonzero(~np.isfinite(mdp.r).all(axis=2))):
            violations.append(f"r[{s}][{a}] contains non-finite entries")
    if violations:
        return violations

    neg = np.nonzero(mdp.P < 0.0)
    for s, a, t in zip(*neg):
        violations.append(f"P[{s}][{a}][{t}] is negative ({mdp.P[s, a, t]:.3g})")
    row_sums = mdp.P.sum(axis=2)
    bad_rows = np.nonzero(np.abs(row_sums - 1.0) > atol)
    for s, a in zip(*bad_rows):
        violations.append(
            f"P[{s}][{a}] row sums to {row_sums[s, a]:.17g}, off by "
            f"{abs(row_sums[s, a] - 1.0):.3g}"
        )
    for s in np.nonzero(~(mdp.mu > 0.0))[0]:
        violations.append(f"mu[{s}] not > 0 (value {mdp.mu[s]:.17g})")
    if abs(mdp.mu.sum() - 1.0) > atol:
        violations.append(f"mu sums to {mdp.mu.sum():.17g}, off by {abs(mdp.mu.sum() - 1.0):.3g}")
    if not (0.0 <= mdp.gamma < 1.0):
        violations.append(f"gamma {mdp.gamma:.17g} outside [0, 1)")
    return violations


def _as_policy_matrix(mdp: Mdp, policy: np.ndarray) -> np.ndarray:
    """Normalize a deterministic or stochastic policy to an (S, A) matrix."""
    pol = np.asarray(policy)
    S, A = mdp.num_states, mdp.num_actions
    if pol.ndim == 1:
        if pol.shape != (S,):
            raise ValueError(f"deterministic policy must have shape ({S},), got {pol.shape}")
        if pol.min() < 0 or pol.max() >= A:
            raise ValueError("policy contains an out-of-range action index")
        mat = np.zeros((S, A))
        mat[np.arange(S), pol.astype(np.int64)] = 1.0
        return mat
    if pol.shape != (S, A):
        raise ValueError(f"stochastic policy must have shape ({S}, {A}), got {pol.shape}")
    pol = pol.astype(float)
    if pol.min() < -1e-12 or np.abs(pol.sum(axis=1) - 1.0).max() > 1e-9:
        raise ValueError("stochastic policy rows must be distributions over actions")
    return pol


def induced_transition(mdp: Mdp, policy: np.ndarray) -> np.ndarray:
    """Return the (S, S) state transition matrix of the Markov chain under policy."""
    mat = _as_policy_matrix(mdp, policy)
    # P_pi[s, t] = sum_a pi(a|s) P[s, a, t]
    return np.einsum("sa,sat->st", mat, mdp.P)


def induced_reward(mdp: Mdp, policy: np.ndarray) -> np.ndarray:
    """Return the (S, D) expected one-step reward under policy."""
    mat = _as_policy_matrix(mdp, policy)
    return np.einsum("sa,sad->sd", mat, mdp.r)


def evaluate_policy(mdp: Mdp, policy: np.ndarray) -> np.ndarray:
    """Compute the exact (S, D) discounted value function of a policy.

    Solves the linear system (I - gamma * P_pi) V = r_pi objective by
    objective with a dense direct solver; no iterative approximation.
    """
    p_pi = induced_transition(mdp, policy)
    r_pi = induced_reward(mdp, policy)
    lhs = np.eye(mdp.num_states) - mdp.gamma * p_pi
    return np.linalg.solve(lhs, r_pi)


def long_term_return(mdp: Mdp, policy: np.ndarray) -> np.ndarray:
    """Return the (D,) expected discounted return from the initial distribution."""
    return mdp.mu @ evaluate_policy(mdp, policy)


def _greedy(q: np.ndarray, tie_tol: float) -> np.ndarray:
    """Row-wise argmax picking the lowest action index among near-ties."""
    return (q >= q.max(axis=1, keepdims=True) - tie_tol).argmax(axis=1)


def solve_scalarized(mdp: Mdp, w: np.ndarray, tie_tol: float = 1e-10) -> np.ndarray:
    """Find a deterministic policy maximizing the w-weighted scalar return.

    Runs exact policy iteration on the scalarized reward r @ w. Ties in the
    greedy step are broken toward the lowest action index so the result is
    deterministic.

    Args:
        mdp: a valid MDP.
        w: strictly positive weight vector of shape (D,).
        tie_tol: two Q-values within this of the row maximum count as tied.

    Returns:
        Int array of shape (S,) with the optimal action per state.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (mdp.num_objectives,):
        raise ValueError(f"w must have shape ({mdp.num_objectives},), got {w.shape}")
    if not np.all(w > 0.0):
        raise ValueError("scalarization weights must be strictly positive")
    S = mdp.num_states
    r_w = mdp.r @ w  # (S, A)
    policy = _greedy(r_w, tie_tol)
    seen = {tuple(policy.tolist())}
    while True:
        p_pi = mdp.P[np.arange(S), policy]
        lhs = np.eye(S) - mdp.gamma * p_pi
        v = np.linalg.solve(lhs, r_w[np.arange(S), policy])
        q = r_w + mdp.gamma * (mdp.P @ v)
        improved = _greedy(q, tie_tol)
        if np.array_equal(improved, policy):
            break
        key = tuple(improved.tolist())
        policy = improved
        if key in seen:
            # A revisit can only happen by cycling through tie-equivalent
            # policies, so the current one is already optimal.
            break
        seen.add(key)
    return policy.astype(np.int64)


def neighbors_one(policy: np.ndarray, num_actions: int) -> list[np.ndarray]:
    """List all policies differing from `policy` in exactly one state.

    The result is ordered state-major with actions ascending, giving exactly
    S * (A - 1) entries.
    """
    pol = np.asarray(policy, dtype=np.int64)
    out = []
    for s in range(pol.shape[0]):
        for a in range(num_actions):
            if a == pol[s]:
                continue
            nb = pol.copy()
            nb[s] = a
            out.append(nb)
    return out


def hamming_distance(p1: np.ndarray, p2: np.ndarray) -> int:
    """Number of states where two deterministic policies disagree."""
    a1 = np.asarray(p1)
    a2 = np.asarray(p2)
    if a1.shape != a2.shape:
        raise ValueError(f"policies have different shapes: {a1.shape} vs {a2.shape}")
    return int(np.count_nonzero(a1 != a2))


def mix_policies(
    policies: Sequence[np.ndarray], weights: Sequence[float], num_actions: int
) -> np.ndarray:
    """Form the stochastic policy that plays policy i with probability weights[i].

    Args:
        policies: deterministic policies of a common shape (S,).
        weights: nonnegative mixture weights summing to 1 within 1e-12.
        num_actions: number of actions A of the underlying MDP.

    Returns:
        Row-stochastic array of shape (S, A).
    """
    w = np.asarray(weights, dtype=float)
    if len(policies) == 0 or w.shape != (len(policies),):
        raise ValueError("need one weight per policy")
    if w.min() < -1e-12:
        raise ValueError(f"mixture weights must be nonnegative, got min {w.min():.3g}")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"mixture weights must sum to 1, got {w.sum():.17g}")
    S = np.asarray(policies[0]).shape[0]
    mat = np.zeros((S, num_actions))
    for pol, wi in zip(policies, w):
        pol = np.asarray(pol, dtype=np.int64)
        if pol.shape != (S,):
            raise ValueError("all policies must share the same number of states")
        mat[np.arange(S), pol] += wi
    return mat


class GridAction(enum.IntEnum):
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


_GRID_MOVES = {
    GridAction.UP: (-1, 0),
    GridAction.DOWN: (1, 0),
    GridAction.LEFT: (0, -1),
    GridAction.RIGHT: (0, 1),
}


def gen_random_mdp(
    seed: int, num_states: int, num_actions: int, num_objectives: int, gamma: float = 0.9
) -> Mdp:
    """Sample a dense random MDP.

    Transition rows are drawn from a flat Dirichlet, rewards uniformly from
    [0, 1], and the initial distribution is uniform, so the result always
    passes validation.

    Args:
        seed: seed for numpy's default_rng; equal seeds give equal MDPs.
        num_states: S >= 1.
        num_actions: A >= 1.
        num_objectives: D >= 1.
        gamma: discount factor in [0, 1).
    """
    if num_states < 1 or num_actions < 1 or num_objectives < 1:
        raise ValueError("num_states, num_actions and num_objectives must be >= 1")
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(num_states), size=(num_states, num_actions))
    r = rng.uniform(size=(num_states, num_actions, num_objectives))
    mu = np.full(num_states, 1.0 / num_states)
    return Mdp(P=P, r=r, gamma=gamma, mu=mu)


def gen_gridworld(
    seed: int, rows: int, cols: int, num_objectives: int, gamma: float = 0.9
) -> Mdp:
    """Build a deterministic gridworld with random multi-objective rewards.

    States are cells in row-major order and the four actions move up, down,
    left and right, staying in place when the move would leave the grid.
    Rewards are uniform [0, 1] per state-action-objective and the initial
    distribution is uniform over cells.
    """
    if rows < 1 or cols < 1 or num_objectives < 1:
        raise ValueError("rows, cols and num_objectives must be >= 1")
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    rng = np.random.default_rng(seed)
    S = rows * cols
    A = len(GridAction)
    P = np.zeros((S, A, S))
    for s in range(S):
        i, j = divmod(s, cols)
        for action in GridAction:
            di, dj = _GRID_MOVES[action]
            ni = min(max(i + di, 0), rows - 1)
            nj = min(max(j + dj, 0), cols - 1)
            P[s, action, ni * cols + nj] = 1.0
    r = rng.uniform(size=(S, A, num_objectives))
    mu = np.full(S, 1.0 / S)
    return Mdp(P=P, r=r, gamma=gamma, mu=mu)


def enumerate_deterministic(num_states: int, num_actions: int) -> Iterator[np.ndarray]:
    """Yield every deterministic policy in lexicographic order.

    Streams A**S policies without materializing the list; callers that need a
    bound should check num_actions ** num_states before iterating.
    """
    if num_states < 1 or num_actions < 1:
        raise ValueError("num_states and num_actions must be >= 1")
    for actions in itertools.product(range(num_actions), repeat=num_states):
        yield np.array(actions, dtype=np.int64)
