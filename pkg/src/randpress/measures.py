"""Random Markov measures: invariant measures with prescribed base marginal.

A measure is given per base symbol s by an initial fiber distribution pi_s
and a row-stochastic fiber transition Q_s supported inside the bundle's
admissibility matrix.  Consistency pi_s Q_s = pi_{s'} along positive base
transitions is the finite encoding of fiberwise invariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import DEFAULT_BUDGET, BaseChain, enumerate_base_words
from .bundle import BundleSFT
from .errors import BudgetExceeded, InvalidMeasure, ShapeMismatch
from .potentials import SubadditivePotential, sup_norm_f1

_ROW_TOL = 1e-12
_CONS_TOL = 1e-10
_F_STAR_FLOOR = -1e6


@dataclass(frozen=True)
class RandomMarkovMeasure:
    initial: np.ndarray  # (S, A) probability rows
    transition: np.ndarray  # (S, A, A) row-stochastic, support inside allowed

    def __post_init__(self):
        pi = np.asarray(self.initial, dtype=float)
        Q = np.asarray(self.transition, dtype=float)
        pi.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "initial", pi)
        object.__setattr__(self, "transition", Q)


@dataclass(frozen=True)
class MeasureReport:
    row_sum_residual: float
    initial_sum_residual: float
    support_violations: int
    consistency_residual: float
    valid: bool


def validate_measure(
    meas: RandomMarkovMeasure, chain: BaseChain, bundle: BundleSFT
) -> MeasureReport:
    """Stochasticity, support and invariance-consistency residuals."""
    S, A = chain.num_states, bundle.num_symbols
    if meas.initial.shape != (S, A) or meas.transition.shape != (S, A, A):
        raise ShapeMismatch(
            f"measure shapes {meas.initial.shape}, {meas.transition.shape} "
            f"do not match (S={S}, A={A})"
        )
    row = float(np.max(np.abs(meas.transition.sum(axis=2) - 1.0)))
    init = float(np.max(np.abs(meas.initial.sum(axis=1) - 1.0)))
    support = int(np.sum((meas.transition > 0.0) & (bundle.allowed == 0)))
    cons = 0.0
    for s in range(S):
        pushed = meas.initial[s] @ meas.transition[s]
        for s2 in range(S):
            if chain.transition[s, s2] > 0.0:
                cons = max(cons, float(np.max(np.abs(pushed - meas.initial[s2]))))
    valid = row <= _ROW_TOL and init <= _ROW_TOL and support == 0 and cons <= _CONS_TOL
    return MeasureReport(row, init, support, cons, valid)


def solve_consistent_initial(
    transition: np.ndarray, chain: BaseChain
) -> tuple[np.ndarray, float]:
    """Least-squares pi_s solving pi_s Q_s = pi_{s'} on positive base edges.

    Returns the clipped/renormalized initials and the worst constraint
    residual after projection.
    """
    Q = np.asarray(transition, dtype=float)
    S, A = Q.shape[0], Q.shape[1]
    rows, rhs = [], []
    for s in range(S):
        for s2 in range(S):
            if chain.transition[s, s2] > 0.0:
                block = np.zeros((A, S * A))
                block[:, s * A:(s + 1) * A] = Q[s].T
                block[:, s2 * A:(s2 + 1) * A] -= np.eye(A)
                rows.append(block)
                rhs.append(np.zeros(A))
    for s in range(S):
        norm = np.zeros((1, S * A))
        norm[0, s * A:(s + 1) * A] = 1.0
        rows.append(norm)
        rhs.append(np.ones(1))
    Amat = np.vstack(rows)
    b = np.concatenate(rhs)
    x, *_ = np.linalg.lstsq(Amat, b, rcond=None)
    pi = np.maximum(x.reshape(S, A), 0.0)
    pi = pi / pi.sum(axis=1, keepdims=True)
    resid = 0.0
    for s in range(S):
        pushed = pi[s] @ Q[s]
        for s2 in range(S):
            if chain.transition[s, s2] > 0.0:
                resid = max(resid, float(np.max(np.abs(pushed - pi[s2]))))
    return pi, resid


def fiber_entropy(meas: RandomMarkovMeasure, chain: BaseChain) -> float:
    """Per-step fiber entropy, closed form over one-step statistics."""
    h = 0.0
    for s in range(chain.num_states):
        for a in range(meas.initial.shape[1]):
            row = meas.transition[s, a]
            pos = row[row > 0.0]
            h += float(chain.stationary[s]) * float(meas.initial[s, a]) * float(
                -(pos * np.log(pos)).sum()
            )
    return h


def _cylinder_distribution(meas: RandomMarkovMeasure, u) -> np.ndarray:
    """Probabilities of all A^n fiber words over the base word u.

    Flat array in lexicographic order with the last symbol fastest.
    """
    A = meas.initial.shape[1]
    probs = meas.initial[u[0]].copy()
    for k in range(1, len(u)):
        probs = (probs.reshape(-1, A)[:, :, None] * meas.transition[u[k - 1]][None, :, :]).reshape(-1)
    return probs


def entropy_cylinder_oracle(
    meas: RandomMarkovMeasure,
    chain: BaseChain,
    bundle: BundleSFT,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """(1/n) E_P[entropy of the n-cylinder fiber distribution], by enumeration."""
    if n < 1:
        raise ValueError("n must be >= 1")
    A = bundle.num_symbols
    if A ** n > budget:
        raise BudgetExceeded(f"{A}^{n} fiber cylinders exceed budget {budget}")
    total = 0.0
    for word in enumerate_base_words(chain, n, budget=budget):
        probs = _cylinder_distribution(meas, word.symbols)
        pos = probs[probs > 0.0]
        total += word.probability * float(-(pos * np.log(pos)).sum())
    return total / n


def cylinder_weights(
    meas: RandomMarkovMeasure, u
) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Support-restricted fiber words of length |u| with their measure weights."""
    words: list[tuple[int, ...]] = []
    weights: list[float] = []
    stack = [
        ((a,), float(meas.initial[u[0], a]))
        for a in reversed(range(meas.initial.shape[1]))
        if meas.initial[u[0], a] > 0.0
    ]
    n = len(u)
    while stack:
        prefix, wgt = stack.pop()
        if len(prefix) == n:
            words.append(prefix)
            weights.append(wgt)
            continue
        k = len(prefix) - 1
        row = meas.transition[u[k], prefix[-1]]
        for b in reversed(range(row.shape[0])):
            if row[b] > 0.0:
                stack.append((prefix + (b,), wgt * float(row[b])))
    return words, np.array(weights)


def potential_average(
    meas: RandomMarkovMeasure,
    chain: BaseChain,
    bundle: BundleSFT,
    potential: SubadditivePotential,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """a_n = integral of f_n against the measure, exact at depth n.

    Additive potentials on consistent measures collapse to n times the
    one-step average; otherwise the expectation is enumerated.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    add = potential.to_additive()
    if add is not None and validate_measure(meas, chain, bundle).valid:
        one_step = 0.0
        for s in range(chain.num_states):
            one_step += float(chain.stationary[s]) * float(
                np.dot(meas.initial[s], add.table[s])
            )
        return n * one_step
    total = 0.0
    for word in enumerate_base_words(chain, n, budget=budget):
        fibers, weights = cylinder_weights(meas, word.symbols)
        for w, wgt in zip(fibers, weights):
            total += word.probability * wgt * potential.eval(word.symbols, w, n)
    return total


@dataclass(frozen=True)
class FStarBracket:
    upper: float  # min over n <= N of a_n / n, a certified upper bound
    estimate: float  # a_N / N
    slope: float  # least-squares slope of a_n vs n over the tail
    minus_inf: bool
    values: tuple[float, ...]  # a_1 .. a_N


def f_star_bracket(
    meas: RandomMarkovMeasure,
    chain: BaseChain,
    bundle: BundleSFT,
    potential: SubadditivePotential,
    N: int,
    budget: int = DEFAULT_BUDGET,
    floor: float = _F_STAR_FLOOR,
) -> FStarBracket:
    """Finite bracket for the sub-additive limit of a_n / n."""
    if N < 1:
        raise ValueError("N must be >= 1")
    a = [potential_average(meas, chain, bundle, potential, n, budget=budget) for n in range(1, N + 1)]
    ratios = [a[i] / (i + 1) for i in range(N)]
    tail = a[N // 2:]
    ns = np.arange(N // 2 + 1, N + 1, dtype=float)
    slope = float(np.polyfit(ns, np.array(tail), 1)[0]) if len(tail) >= 2 else ratios[-1]
    return FStarBracket(
        upper=float(min(ratios)),
        estimate=float(ratios[-1]),
        slope=slope,
        minus_inf=bool(ratios[-1] < floor),
        values=tuple(a),
    )


def _window_expectation(
    meas: RandomMarkovMeasure,
    chain: BaseChain,
    potential: SubadditivePotential,
    i: int,
    k: int,
) -> float:
    """E[f_k composed with the i-fold skew shift], via the joint Markov kernel.

    The pair process (base symbol, fiber symbol) is Markov with kernel
    P(s,s') Q_s(a,b); the window marginal at offset i is exact regardless of
    whether the measure is invariant.
    """
    S, A = meas.initial.shape
    D = chain.stationary[:, None] * meas.initial  # joint at time 0
    for _ in range(i):
        D2 = np.zeros_like(D)
        for s in range(S):
            push = D[s][:, None] * meas.transition[s]  # (A, A): mass a -> b
            D2 += chain.transition[s][:, None] * push.sum(axis=0)[None, :]
        D = D2
    total = 0.0
    stack = [((s,), (a,), float(D[s, a])) for s in range(S) for a in range(A) if D[s, a] > 0.0]
    while stack:
        v, x, wgt = stack.pop()
        if len(v) == k:
            total += wgt * potential.eval(v, x, k)
            continue
        j = len(v) - 1
        for s2 in range(S):
            pb = chain.transition[v[j], s2]
            if pb <= 0.0:
                continue
            for b in range(A):
                qb = meas.transition[v[j], x[j], b]
                if qb > 0.0:
                    stack.append((v + (s2,), x + (b,), wgt * float(pb) * float(qb)))
    return total


def check_lemma34(
    meas: RandomMarkovMeasure,
    chain: BaseChain,
    bundle: BundleSFT,
    potential: SubadditivePotential,
    n: int,
    k: int,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Slack of the blocking inequality k a_n <= 4 k^2 ||f_1|| + sum of shifted a_k.

    All three terms are computed exactly; the slack must be >= -1e-12.
    """
    if not n > k >= 1:
        raise ValueError("need n > k >= 1")
    rep = validate_measure(meas, chain, bundle)
    if not rep.valid:
        raise InvalidMeasure(f"measure fails validation: {rep}")
    C = sup_norm_f1(potential, chain, bundle)
    lhs = k * potential_average(meas, chain, bundle, potential, n, budget=budget)
    shifted = sum(_window_expectation(meas, chain, potential, i, k) for i in range(n))
    rhs = 4.0 * k * k * C + shifted
    return float(rhs - lhs)
