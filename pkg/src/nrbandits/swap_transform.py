"""Turning a distribution over virtual swap actions into a mixed strategy.

A virtual action (i -> j) moves the probability of action i onto action j. Given
weights ``delta[i, j]`` over the N(N-1) ordered pairs, the mixed strategy P is a
fixed point of

    P = sum_{i != j} delta[i, j] * swap(P, i, j),

i.e. the stationary law of the Markov chain that jumps i -> j with probability
``delta[i, j]`` and otherwise stays put.
"""
from __future__ import annotations

import numpy as np

from .core import SUM_HARD_TOL, DomainError, SolverError, check_strategy, project_to_simplex

RESIDUAL_TOL = 1e-9
POWER_TOL = 1e-10
POWER_MAX_ITER = 10**5


def pair_list(n: int) -> list[tuple[int, int]]:
    """Ordered pairs (i, j), i != j, in row-major order."""
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def pairs_to_matrix(values, n: int) -> np.ndarray:
    """Place N(N-1) pair values into an N x N matrix with zero diagonal."""
    v = np.asarray(values, dtype=float)
    if v.shape != (n * (n - 1),):
        raise DomainError(f"expected {n * (n - 1)} pair values, got {v.shape}")
    m = np.zeros((n, n))
    m[~np.eye(n, dtype=bool)] = v
    return m


def matrix_to_pairs(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    return m[~np.eye(n, dtype=bool)]


def check_pair_distribution(delta: np.ndarray, tol: float = SUM_HARD_TOL) -> np.ndarray:
    d = np.asarray(delta, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 2:
        raise DomainError("pair distribution must be an N x N matrix, N >= 2")
    if not np.all(np.isfinite(d)) or d.min() < 0:
        raise DomainError("pair distribution has negative or non-finite entries")
    if np.any(np.diag(d) != 0):
        raise DomainError("pair distribution has mass on the diagonal")
    if abs(d.sum() - 1.0) > tol:
        raise DomainError(f"pair distribution sums to {d.sum():.15f}")
    return d


def swap_strategy(probs, i: int, j: int) -> np.ndarray:
    if i == j:
        raise DomainError("a swap needs two distinct actions")
    p = np.array(probs, dtype=float)
    p[j] += p[i]
    p[i] = 0.0
    return p


def swap_matrix(delta: np.ndarray) -> np.ndarray:
    """Column-stochastic S with S @ P = sum delta[i, j] * swap(P, i, j)."""
    d = np.asarray(delta, dtype=float)
    S = np.eye(d.shape[0]) + d.T
    S[np.diag_indices_from(S)] -= d.sum(axis=1)
    return S


def fixed_point_residual(probs: np.ndarray, delta: np.ndarray) -> float:
    """L1 norm of P - sum delta[i, j] swap(P, i, j)."""
    d = np.asarray(delta, dtype=float)
    flow = d.T @ probs - probs * d.sum(axis=1)
    return float(np.abs(flow).sum())


def _gth(rates: np.ndarray) -> np.ndarray:
    """Stationary law of an irreducible chain from its off-diagonal rates.

    Grassmann-Taksar-Heyman state reduction: no subtractions, so tiny rates
    keep full relative accuracy.
    """
    n = rates.shape[0]
    if n <= 16:
        return _gth_lists(rates.tolist(), n)
    a = np.array(rates, dtype=float)
    np.fill_diagonal(a, 0.0)
    for k in range(n - 1, 0, -1):
        s = a[k, :k].sum()
        if s <= 0:
            raise SolverError("chain is not irreducible", float("inf"))
        a[:k, :k] += np.outer(a[:k, k], a[k, :k] / s)
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ a[:k, k] / a[k, :k].sum()
    return pi / pi.sum()


def _gth_lists(a: list, n: int) -> np.ndarray:
    # plain-Python variant; numpy call overhead dominates for small chains
    for k in range(n - 1, 0, -1):
        row = a[k]
        s = sum(row[:k])
        if s <= 0:
            raise SolverError("chain is not irreducible", float("inf"))
        scaled = [x / s for x in row[:k]]
        for i in range(k):
            f = a[i][k]
            if f:
                ai = a[i]
                for j in range(k):
                    ai[j] += f * scaled[j]
    pi = [1.0] + [0.0] * (n - 1)
    for k in range(1, n):
        num = 0.0
        for i in range(k):
            num += pi[i] * a[i][k]
        pi[k] = num / sum(a[k][:k])
    total = sum(pi)
    return np.array(pi) / total


def _closed_classes(adj: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Closed communicating classes and the transient states of a transition graph."""
    n = adj.shape[0]
    reach = adj | np.eye(n, dtype=bool)
    for k in range(n):  # transitive closure
        reach |= reach[:, k : k + 1] & reach[k : k + 1, :]
    closed, seen = [], np.zeros(n, dtype=bool)
    for i in range(n):
        if seen[i]:
            continue
        cls = reach[i] & reach[:, i]
        seen |= cls
        # closed: nothing reachable from the class lies outside it
        if not np.any(reach[i] & ~cls):
            closed.append(np.flatnonzero(cls))
    in_closed = np.zeros(n, dtype=bool)
    for c in closed:
        in_closed[c] = True
    return closed, np.flatnonzero(~in_closed)


def _start_limit(delta: np.ndarray, start: np.ndarray | None = None) -> np.ndarray:
    """lim_t S^t u for a start vector u (uniform by default), computed exactly.

    Each closed class keeps the mass absorbed into it from u and spreads it
    according to its own stationary law. When the chain has a single closed
    class the start is irrelevant.
    """
    n = delta.shape[0]
    adj = delta > 0
    if adj.sum() == n * (n - 1):
        return _gth(delta)
    closed, transient = _closed_classes(adj)
    if len(closed) == 1 and not transient.size:
        return _gth(delta)
    u = np.full(n, 1.0 / n) if start is None else np.asarray(start, dtype=float)
    mass = _absorb(delta, u, transient) if transient.size else u.copy()
    out = np.zeros(n)
    out[transient] = mass[transient]  # nonzero only where exits underflowed
    for c in closed:
        out[c] = mass[c].sum() * (_gth(delta[np.ix_(c, c)]) if c.size > 1 else 1.0)
    return out


def _absorb(delta: np.ndarray, u: np.ndarray, transient: np.ndarray) -> np.ndarray:
    """Push the mass of transient states onto the closed classes.

    States are eliminated one at a time, rerouting their flows to their
    successors; like GTH this needs no subtractions. A state whose exits have
    all underflowed to zero keeps its mass.
    """
    a = delta.tolist()
    mass = u.tolist()
    n = len(mass)
    alive = set(range(n))
    for k in transient.tolist():
        alive.discard(k)
        row = a[k]
        out = {j: row[j] for j in alive if row[j] > 0}
        s = sum(out.values())
        if s <= 0:
            continue
        frac = {j: r / s for j, r in out.items()}
        for j, w in frac.items():
            mass[j] += mass[k] * w
        mass[k] = 0.0
        for i in alive:
            f = a[i][k]
            if f:
                ai = a[i]
                for j, w in frac.items():
                    if j != i:
                        ai[j] += f * w
    return np.array(mass)


def _power_iteration(delta: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    S = swap_matrix(delta)
    n = delta.shape[0]
    p = np.full(n, 1.0 / n)
    prev_change = np.inf
    for _ in range(max_iter):
        q = S @ p
        change = np.abs(q - p).sum()
        p = q
        if change <= tol:
            return p
        if change >= prev_change and change < 1e-13:
            break  # stagnated at round-off
        prev_change = change
    # dense fallback: (S - I) P = 0 with sum(P) = 1
    A = np.vstack([S - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    return np.linalg.lstsq(A, b, rcond=None)[0]


def solve_fixed_point(delta: np.ndarray, method: str = "exact", tol: float = RESIDUAL_TOL) -> np.ndarray:
    """Mixed strategy P with P = sum delta[i, j] swap(P, i, j).

    ``method="exact"`` uses state reduction (and, for reducible chains, the
    limit of power iteration started from the uniform vector, computed in
    closed form). ``method="power"`` runs that power iteration directly with a
    dense least-squares fallback. Raises SolverError if the residual exceeds
    ``tol``.
    """
    d = check_pair_distribution(delta)
    S_cols = swap_matrix(d).sum(axis=0)
    if np.abs(S_cols - 1.0).max() > 1e-12:
        raise SolverError("swap matrix is not column-stochastic", float(np.abs(S_cols - 1).max()))
    if method == "exact":
        return fixed_point(d, tol)
    if method != "power":
        raise DomainError(f"unknown method {method!r}")
    return _finish(_power_iteration(d, POWER_TOL, POWER_MAX_ITER), d, tol)


def fixed_point(delta: np.ndarray, tol: float = RESIDUAL_TOL, start: np.ndarray | None = None) -> np.ndarray:
    """Unvalidated fast path of ``solve_fixed_point`` for callers that build delta themselves.

    ``start`` replaces the uniform vector as the power-iteration start used to
    pick a fixed point of a reducible chain.
    """
    return _finish(_start_limit(delta, start), delta, tol)


def _finish(p: np.ndarray, delta: np.ndarray, tol: float) -> np.ndarray:
    if not np.all(np.isfinite(p)):
        raise SolverError("fixed point is not finite", float("inf"))
    p = project_to_simplex(p, hard_tol=SUM_HARD_TOL)
    res = fixed_point_residual(p, delta)
    if res > tol:
        raise SolverError("fixed point residual above tolerance", res)
    return p


def mix_uniform(probs, gamma: float) -> np.ndarray:
    """(1 - gamma) * P + gamma / N."""
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma={gamma} outside [0, 1]")
    p = check_strategy(probs)
    return (1.0 - gamma) * p + gamma / p.size
