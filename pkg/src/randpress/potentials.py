"""Sub-additive potential families as cylinder functionals.

All shipped potentials are locally constant: f_n depends only on the first n
coordinates of the (base word, fiber word) pair, so partition-sum suprema
over cylinders are attained everywhere on the cylinder and can be computed
exactly.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .base import BaseChain, BaseWord
from .bundle import BundleSFT, apply_skew
from .errors import SingularMatrix


def _symbols(word) -> tuple[int, ...]:
    return tuple(word.symbols) if isinstance(word, BaseWord) else tuple(word)


class SubadditivePotential(ABC):
    """Family f_n with f_{n+m} <= f_n + f_m composed with the n-fold skew shift."""

    @abstractmethod
    def eval(self, u, w, n: int) -> float:
        """Value of f_n on the cylinder given by the first n coordinates of (u, w)."""

    def to_additive(self) -> "AdditivePotential | None":
        """An exactly equivalent additive potential, when one exists."""
        return None


@dataclass(frozen=True)
class AdditivePotential(SubadditivePotential):
    """Birkhoff sums of a one-step function phi(base symbol, fiber symbol)."""

    table: np.ndarray  # (S, A), nats per step

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def eval(self, u, w, n: int) -> float:
        us, ws = _symbols(u), tuple(w)
        return float(sum(self.table[us[k], ws[k]] for k in range(n)))

    def to_additive(self):
        return self


def _mat_norm(P: np.ndarray, kind: str) -> float:
    if kind == "spectral":
        return float(np.linalg.norm(P, 2))
    if kind == "max_row_sum":
        return float(np.linalg.norm(P, np.inf))
    raise ValueError(f"unknown norm kind {kind!r}")


@dataclass(frozen=True)
class CocyclePotential(SubadditivePotential):
    """Log operator norm of a matrix cocycle driven by (base, fiber) symbols.

    f_n = log || B(u_{n-1}, w_{n-1}) ... B(u_0, w_0) || with a submultiplicative
    norm, which gives subadditivity for free.
    """

    matrices: np.ndarray  # (S, A, d, d)
    norm_kind: str = "spectral"

    def __post_init__(self):
        B = np.asarray(self.matrices, dtype=float)
        if B.ndim != 4 or B.shape[2] != B.shape[3]:
            raise ValueError("matrices must have shape (S, A, d, d)")
        if self.norm_kind not in ("spectral", "max_row_sum"):
            raise ValueError(f"unknown norm kind {self.norm_kind!r}")
        B.setflags(write=False)
        object.__setattr__(self, "matrices", B)

    @property
    def dim(self) -> int:
        return self.matrices.shape[2]

    def product(self, u, w, n: int) -> np.ndarray:
        us, ws = _symbols(u), tuple(w)
        P = np.eye(self.dim)
        for k in range(n):
            P = self.matrices[us[k], ws[k]] @ P
        return P

    def eval(self, u, w, n: int) -> float:
        return float(np.log(_mat_norm(self.product(u, w, n), self.norm_kind)))

    def to_additive(self):
        if self.dim != 1:
            return None
        return AdditivePotential(np.log(np.abs(self.matrices[:, :, 0, 0])))


@dataclass(frozen=True)
class ScaledInverseNormPotential(SubadditivePotential):
    """t * log || (B^(n))^{-1} ||, the sub-additive family behind the Bowen equation.

    Equals -t * log m(B^(n)) with m(A) = ||A^{-1}||^{-1}; sub-additive for
    every t >= 0 since inverse norms are submultiplicative in reverse order.
    """

    inner: CocyclePotential
    t: float

    def __post_init__(self):
        if self.t < 0.0:
            raise ValueError("scale t must be >= 0")

    def eval(self, u, w, n: int) -> float:
        if self.t == 0.0:
            return 0.0
        P = self.inner.product(u, w, n)
        try:
            Pinv = np.linalg.inv(P)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix(str(exc)) from exc
        if not np.isfinite(Pinv).all():
            raise SingularMatrix("non-finite inverse of cocycle product")
        return float(self.t * np.log(_mat_norm(Pinv, self.inner.norm_kind)))

    def to_additive(self):
        if self.inner.dim != 1:
            return None
        b = self.inner.matrices[:, :, 0, 0]
        if np.any(b == 0.0):
            raise SingularMatrix("scalar cocycle entry is zero")
        return AdditivePotential(-self.t * np.log(np.abs(b)))


def _random_admissible_pair(chain: BaseChain, bundle: BundleSFT, length: int, rng) -> tuple[tuple[int, ...], tuple[int, ...]]:
    u = [int(rng.choice(chain.num_states, p=chain.stationary))]
    for _ in range(length - 1):
        u.append(int(rng.choice(chain.num_states, p=chain.transition[u[-1]])))
    w = [int(rng.integers(bundle.num_symbols))]
    for k in range(length - 1):
        choices = np.nonzero(bundle.allowed[u[k], w[-1]])[0]
        w.append(int(rng.choice(choices)))
    return tuple(u), tuple(w)


def check_subadditivity(
    potential: SubadditivePotential,
    chain: BaseChain,
    bundle: BundleSFT,
    sample_count: int = 1000,
    seed: int = 0,
    max_block: int = 4,
) -> float:
    """Worst sampled violation of f_{n+m} <= f_n + f_m after the n-shift.

    Returns max over samples of f_{n+m} - f_n - f_m(shifted); valid potentials
    stay <= ~1e-12 up to roundoff.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(sample_count):
        n = int(rng.integers(1, max_block + 1))
        m = int(rng.integers(1, max_block + 1))
        u, w = _random_admissible_pair(chain, bundle, n + m, rng)
        us, ws = apply_skew(bundle, u, w, n)
        viol = potential.eval(u, w, n + m) - potential.eval(u, w, n) - potential.eval(us, ws, m)
        worst = max(worst, viol)
    return float(worst)


def sup_norm_f1(potential: SubadditivePotential, chain: BaseChain, bundle: BundleSFT) -> float:
    """The one-step norm ||f_1||: base expectation of the fiber sup of |f_1|."""
    total = 0.0
    for s in range(chain.num_states):
        sups = [
            abs(potential.eval((s,), (a,), 1))
            for a in range(bundle.num_symbols)
            if bundle.allowed[s, a].any()
        ]
        total += float(chain.stationary[s]) * max(sups)
    return total
