"""Random subshift of finite type: fibers, skew product, separation structure.

Fiber admissibility is controlled by one 0/1 matrix per base symbol, indexed
at the source time: a fiber word w over a base word u is admissible when
M_{u_k}(w_k, w_{k+1}) = 1 for every consecutive pair.  The fiber metric is
d(x, y) = 2^{-first disagreement index} and resolutions are powers 2^{-m},
which turns separation into a pure cylinder condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import DEFAULT_BUDGET, BaseWord
from .errors import BudgetExceeded, WordTooShort


def _symbols(word) -> tuple[int, ...]:
    return tuple(word.symbols) if isinstance(word, BaseWord) else tuple(word)


@dataclass(frozen=True)
class BundleSFT:
    """Fiber alphabet plus per-base-symbol admissibility matrices.

    Every row of every matrix must contain a 1 so that each fiber point
    extends and fibers stay nonempty.  With ``strict=True`` zero columns are
    also rejected, which upgrades forward invariance of the fibers from
    inclusion to equality.
    """

    alphabet: tuple[str, ...]
    allowed: np.ndarray  # (S, A, A) with entries in {0, 1}
    strict: bool = False

    def __post_init__(self):
        M = np.asarray(self.allowed)
        if M.ndim != 3 or M.shape[1] != M.shape[2]:
            raise ValueError("allowed must have shape (num_base_symbols, A, A)")
        if not np.isin(M, (0, 1)).all():
            raise ValueError("admissibility matrices must be 0/1")
        if (M.sum(axis=2) == 0).any():
            s, a = np.argwhere(M.sum(axis=2) == 0)[0]
            raise ValueError(f"zero row: matrix for base symbol {s}, fiber row {a}")
        if self.strict and (M.sum(axis=1) == 0).any():
            s, a = np.argwhere(M.sum(axis=1) == 0)[0]
            raise ValueError(f"zero column: matrix for base symbol {s}, fiber column {a}")
        if len(self.alphabet) != M.shape[1]:
            raise ValueError("alphabet does not match matrix size")
        M = M.astype(np.int8)
        M.setflags(write=False)
        object.__setattr__(self, "allowed", M)

    @classmethod
    def from_matrices(cls, matrices, alphabet=None, strict: bool = False) -> "BundleSFT":
        M = np.asarray(matrices)
        names = tuple(alphabet) if alphabet is not None else tuple(f"a{i}" for i in range(M.shape[1]))
        return cls(alphabet=names, allowed=M, strict=strict)

    @property
    def num_symbols(self) -> int:
        return len(self.alphabet)

    def is_admissible(self, base_symbols, fiber_symbols) -> bool:
        u, w = _symbols(base_symbols), tuple(fiber_symbols)
        return all(self.allowed[u[k], w[k], w[k + 1]] == 1 for k in range(len(w) - 1))


@dataclass(frozen=True)
class Cylinder:
    """A finite (base word, fiber word) pair of equal length."""

    base_word: BaseWord
    fiber_word: tuple[int, ...]


def enumerate_cylinders(bundle: BundleSFT, u, ell: int, budget: int = DEFAULT_BUDGET) -> list[tuple[int, ...]]:
    """All admissible fiber words of length ell over the base word u."""
    syms = _symbols(u)
    if ell < 1 or ell > len(syms):
        raise ValueError("need |u| >= ell >= 1")
    if bundle.num_symbols ** ell > budget:
        raise BudgetExceeded(f"{bundle.num_symbols}^{ell} fiber words exceed budget {budget}")
    M = bundle.allowed
    words: list[tuple[int, ...]] = []
    stack = [((a,),) for a in reversed(range(bundle.num_symbols))]
    stack = [w[0] for w in stack]
    while stack:
        prefix = stack.pop()
        if len(prefix) == ell:
            words.append(prefix)
            continue
        k = len(prefix) - 1
        for b in reversed(range(bundle.num_symbols)):
            if M[syms[k], prefix[-1], b]:
                stack.append(prefix + (b,))
    return words


def transfer_count(bundle: BundleSFT, u, ell: int) -> int:
    """Number of admissible length-ell fiber words via the matrix product."""
    syms = _symbols(u)
    if ell < 1 or ell > len(syms):
        raise ValueError("need |u| >= ell >= 1")
    vec = np.ones(bundle.num_symbols, dtype=object)
    for k in range(ell - 2, -1, -1):
        vec = bundle.allowed[syms[k]].astype(object) @ vec
    return int(vec.sum())


def apply_skew(bundle: BundleSFT, u, w, k: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """k-fold skew product: shift both the base word and the fiber word."""
    syms, fib = _symbols(u), tuple(w)
    if k < 0 or k >= len(syms) or k >= len(fib):
        raise IndexError(f"shift {k} out of range for lengths {len(syms)}, {len(fib)}")
    return syms[k:], fib[k:]


def separated_predicate(x, y, n: int, m: int) -> bool:
    """Whether two fiber words are (epsilon, n)-separated at epsilon = 2^-m.

    With the 2^-j metric this holds exactly when the words disagree at some
    coordinate in [0, n+m-2].
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    xs, ys = tuple(x), tuple(y)
    span = n + m - 1
    if len(xs) < span or len(ys) < span:
        raise WordTooShort(f"need words of length >= {span}")
    return any(xs[i] != ys[i] for i in range(span))
