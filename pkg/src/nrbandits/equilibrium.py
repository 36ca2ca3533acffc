"""Equilibrium analytics on finite stationary games.

Payoff tensors have shape (K, N_1, ..., N_K): entry [k, a_1, ..., a_K] is
player k's expected payoff at that joint profile.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .core import CapacityError, DomainError, SolverError

MAX_LP_PROFILES = 10**4
NASH_TOL = 1e-12


@dataclass
class EmpiricalJointDistribution:
    """Counts of joint action profiles over a run."""

    counts: dict = field(default_factory=dict)
    total: int = 0

    def update(self, profile) -> "EmpiricalJointDistribution":
        key = tuple(int(a) for a in profile)
        self.counts[key] = self.counts.get(key, 0) + 1
        self.total += 1
        return self

    def frequency(self, profile) -> float:
        if self.total == 0:
            return 0.0
        return self.counts.get(tuple(profile), 0) / self.total

    def to_array(self, shape) -> np.ndarray:
        """Dense frequency array over all profiles of the given shape."""
        if self.total == 0:
            raise DomainError("empirical distribution has no observations")
        out = np.zeros(tuple(shape))
        for prof, c in self.counts.items():
            if len(prof) != len(out.shape) or any(a >= n for a, n in zip(prof, out.shape)):
                raise DomainError(f"profile {prof} does not fit shape {tuple(shape)}")
            out[prof] = c
        return out / self.total

    @classmethod
    def from_array(cls, freqs: np.ndarray, total: int = 10**9) -> "EmpiricalJointDistribution":
        """Round a frequency array into integer counts (for tests and tooling)."""
        freqs = np.asarray(freqs, dtype=float)
        counts = np.rint(freqs / freqs.sum() * total).astype(np.int64)
        d = cls()
        for prof in zip(*np.nonzero(counts)):
            d.counts[tuple(int(a) for a in prof)] = int(counts[prof])
        d.total = int(counts.sum())
        return d


def update_empirical(dist: EmpiricalJointDistribution, profile) -> EmpiricalJointDistribution:
    return dist.update(profile)


def _as_joint(dist, shape) -> np.ndarray:
    if isinstance(dist, EmpiricalJointDistribution):
        return dist.to_array(shape)
    pi = np.asarray(dist, dtype=float)
    if pi.shape != tuple(shape):
        raise DomainError(f"distribution shape {pi.shape} does not match payoffs {tuple(shape)}")
    return pi


def _check_payoffs(payoffs) -> np.ndarray:
    U = np.asarray(payoffs, dtype=float)
    if U.ndim < 2 or U.shape[0] != U.ndim - 1:
        raise DomainError(f"payoff tensor shape {U.shape} is not (K, N_1, ..., N_K)")
    if not np.all(np.isfinite(U)):
        raise DomainError("payoff tensor has non-finite entries")
    return U


def deviation_gains(dist, payoffs) -> list[np.ndarray]:
    """Per player k, the matrix G[i, j] of expected gain from playing j whenever told i."""
    U = _check_payoffs(payoffs)
    pi = _as_joint(dist, U.shape[1:])
    out = []
    for k in range(U.shape[0]):
        n = U.shape[k + 1]
        P = np.moveaxis(pi, k, 0).reshape(n, -1)
        V = np.moveaxis(U[k], k, 0).reshape(n, -1)
        G = P @ V.T - (P * V).sum(axis=1)[:, None]
        np.fill_diagonal(G, 0.0)
        out.append(G)
    return out


def ce_violation(dist, payoffs) -> float:
    """Largest gain any player gets from a swap deviation; <= tol means tol-approximate CE."""
    return float(max(G.max() for G in deviation_gains(dist, payoffs)))


def _ce_rows(U: np.ndarray) -> sparse.csr_matrix:
    """One row per (k, i, j), i != j: sum over profiles with k at i of pi * (u_k(j, .) - u_k(i, .))."""
    shape = U.shape[1:]
    M = int(np.prod(shape))
    idx = np.arange(M).reshape(shape)
    rows, cols, vals = [], [], []
    r = 0
    for k in range(U.shape[0]):
        n = shape[k]
        V = np.moveaxis(U[k], k, 0).reshape(n, -1)
        I = np.moveaxis(idx, k, 0).reshape(n, -1)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                rows.append(np.full(I.shape[1], r))
                cols.append(I[i])
                vals.append(V[j] - V[i])
                r += 1
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(r, M))


def ce_distance(dist, payoffs) -> float:
    """L1 distance from ``dist`` to the correlated-equilibrium polytope, by linear programming.

    Variables are pi (M entries) and slacks s with s >= |pi - pi_hat|; the
    objective is sum(s).
    """
    U = _check_payoffs(payoffs)
    shape = U.shape[1:]
    M = int(np.prod(shape))
    if M > MAX_LP_PROFILES:
        raise CapacityError(f"{M} profiles exceed the LP limit of {MAX_LP_PROFILES}")
    target = _as_joint(dist, shape).ravel()
    eye = sparse.identity(M, format="csr")
    ce = _ce_rows(U)
    A_ub = sparse.vstack([
        sparse.hstack([ce, sparse.csr_matrix((ce.shape[0], M))]),
        sparse.hstack([eye, -eye]),
        sparse.hstack([-eye, -eye]),
    ], format="csr")
    b_ub = np.concatenate([np.zeros(ce.shape[0]), target, -target])
    A_eq = sparse.hstack([sparse.csr_matrix(np.ones((1, M))), sparse.csr_matrix((1, M))], format="csr")
    c = np.concatenate([np.zeros(M), np.ones(M)])
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        # the CE set of a finite game is never empty
        raise SolverError(f"CE distance LP failed: {res.message}")
    return max(float(res.fun), 0.0)


def brute_force_pure_nash(payoffs, tol: float = NASH_TOL) -> list[tuple[int, ...]]:
    """All profiles where no player gains more than ``tol`` by a unilateral deviation."""
    U = _check_payoffs(payoffs)
    ok = np.ones(U.shape[1:], dtype=bool)
    for k in range(U.shape[0]):
        ok &= U[k] >= U[k].max(axis=k, keepdims=True) - tol
    return [tuple(int(a) for a in p) for p in zip(*np.nonzero(ok))]


@dataclass(frozen=True)
class PotentialResult:
    profiles: list
    tied: bool

    @property
    def profile(self) -> tuple[int, ...]:
        return self.profiles[0]


def potential_maximizer(payoffs, tol: float = NASH_TOL) -> PotentialResult:
    """Maximisers of the sum of payoffs; every tie within ``tol`` is returned and flagged."""
    U = _check_payoffs(payoffs)
    f = U.sum(axis=0)
    best = np.flatnonzero(f.ravel() >= f.max() - tol)
    profiles = [tuple(int(a) for a in np.unravel_index(b, f.shape)) for b in best]
    return PotentialResult(profiles, len(profiles) > 1)


def point_mass(profile, shape) -> np.ndarray:
    pi = np.zeros(tuple(shape))
    pi[tuple(profile)] = 1.0
    return pi


def product_distribution(strategies) -> np.ndarray:
    """Joint law of independent mixed strategies."""
    out = np.ones(())
    for p in strategies:
        out = np.multiply.outer(out, np.asarray(p, dtype=float))
    return out


def all_profiles(shape):
    return itertools.product(*(range(n) for n in shape))
