"""Driving system: a finite ergodic Markov chain viewed as a shift space.

The chain's path space plays the role of the base probability space; every
functional we evaluate depends on finitely many coordinates, so finite words
with their stationary cylinder probabilities are a complete surrogate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import BudgetExceeded, NonErgodicChain

DEFAULT_BUDGET = 2_000_000

_ROW_SUM_TOL = 1e-12
_STATIONARY_TOL = 1e-10


def _strongly_connected(adj: np.ndarray) -> bool:
    n = adj.shape[0]

    def reach(a):
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            for j in np.nonzero(a[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        return seen

    return bool(reach(adj).all() and reach(adj.T).all())


def _period(adj: np.ndarray) -> int:
    """Period of a strongly connected digraph via BFS level differences."""
    n = adj.shape[0]
    dist = np.full(n, -1, dtype=int)
    dist[0] = 0
    queue = [0]
    while queue:
        i = queue.pop(0)
        for j in np.nonzero(adj[i])[0]:
            if dist[j] < 0:
                dist[j] = dist[i] + 1
                queue.append(int(j))
    g = 0
    for i in range(n):
        for j in np.nonzero(adj[i])[0]:
            g = gcd(g, dist[i] + 1 - dist[j])
    return abs(g) if g != 0 else 1


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Stationary probability vector p with p @ T = p.

    Direct linear solve for small chains (exact at desk scale), power
    iteration with tight tolerance beyond.
    """
    T = np.asarray(transition, dtype=float)
    n = T.shape[0]
    if T.shape != (n, n):
        raise ValueError("transition matrix must be square")
    if np.max(np.abs(T.sum(axis=1) - 1.0)) > _ROW_SUM_TOL:
        raise ValueError("transition matrix rows must sum to 1")
    adj = T > 0.0
    if not _strongly_connected(adj):
        raise NonErgodicChain("positive-transition graph is not strongly connected")
    if _period(adj) != 1:
        raise NonErgodicChain("positive-transition graph is periodic")
    if n <= 8:
        # Solve p (T - I) = 0 together with sum(p) = 1.
        A = np.vstack([T.T - np.eye(n), np.ones(n)])
        b = np.zeros(n + 1)
        b[-1] = 1.0
        p, *_ = np.linalg.lstsq(A, b, rcond=None)
    else:
        p = np.full(n, 1.0 / n)
        for _ in range(1_000_000):
            q = p @ T
            if np.max(np.abs(q - p)) < 1e-14:
                p = q
                break
            p = q
    p = np.maximum(p, 0.0)
    p = p / p.sum()
    if np.max(np.abs(p @ T - p)) > _STATIONARY_TOL or np.any(p <= 0.0):
        raise NonErgodicChain("stationary vector residual or positivity check failed")
    return p


@dataclass(frozen=True)
class BaseWord:
    """Finite admissible base word with its stationary cylinder probability."""

    symbols: tuple[int, ...]
    probability: float

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class BaseChain:
    """Finite-state ergodic Markov chain (states, row-stochastic transition, stationary)."""

    states: tuple[str, ...]
    transition: np.ndarray
    stationary: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        T = np.asarray(self.transition, dtype=float)
        p = stationary_distribution(T) if self.stationary is None else np.asarray(self.stationary, float)
        T.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "transition", T)
        object.__setattr__(self, "stationary", p)
        if len(self.states) != T.shape[0]:
            raise ValueError("state list does not match transition matrix size")

    @classmethod
    def from_transition(cls, transition, states=None) -> "BaseChain":
        T = np.asarray(transition, dtype=float)
        names = tuple(states) if states is not None else tuple(f"s{i}" for i in range(T.shape[0]))
        return cls(states=names, transition=T, stationary=None)

    @property
    def num_states(self) -> int:
        return len(self.states)

    def is_admissible(self, symbols) -> bool:
        return all(self.transition[a, b] > 0.0 for a, b in zip(symbols, symbols[1:]))

    def word_probability(self, symbols) -> float:
        """Stationary cylinder probability p(u0) * prod T(u_k, u_{k+1})."""
        prob = float(self.stationary[symbols[0]])
        for a, b in zip(symbols, symbols[1:]):
            prob *= float(self.transition[a, b])
        return prob


def enumerate_base_words(chain: BaseChain, n: int, budget: int = DEFAULT_BUDGET) -> list[BaseWord]:
    """All admissible length-n words with their cylinder probabilities."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    if chain.num_states ** n > budget:
        raise BudgetExceeded(f"{chain.num_states}^{n} base words exceed budget {budget}")
    T = chain.transition
    words: list[BaseWord] = []
    stack = [((s,), float(chain.stationary[s])) for s in reversed(range(chain.num_states))]
    while stack:
        prefix, prob = stack.pop()
        if len(prefix) == n:
            words.append(BaseWord(prefix, prob))
            continue
        last = prefix[-1]
        for b in reversed(range(chain.num_states)):
            if T[last, b] > 0.0:
                stack.append((prefix + (b,), prob * float(T[last, b])))
    return words


def sample_path(chain: BaseChain, n: int, seed) -> BaseWord:
    """Deterministic stationary-chain sample of a length-n word.

    A pure function of (chain, n, seed); seed may be an int or a sequence of
    ints (used to derive independent per-sample streams).
    """
    if n < 1:
        raise ValueError("path length must be >= 1")
    rng = np.random.default_rng(seed)
    k = chain.num_states
    symbols = np.empty(n, dtype=int)
    symbols[0] = rng.choice(k, p=chain.stationary)
    for i in range(1, n):
        symbols[i] = rng.choice(k, p=chain.transition[symbols[i - 1]])
    syms = tuple(int(s) for s in symbols)
    return BaseWord(syms, chain.word_probability(syms))


def words_matrix(words: list[BaseWord]) -> tuple[np.ndarray, np.ndarray]:
    """Stack words into an (N, L) int array plus their probability vector."""
    arr = np.array([w.symbols for w in words], dtype=np.int64)
    probs = np.array([w.probability for w in words], dtype=float)
    return arr, probs
