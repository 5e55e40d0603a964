"""Bowen-equation dimension solver for (asymptotically) conformal cocycles.

The pressure-in-t map uses a depth-increment estimator
E[log Z(n)] - E[log Z(n-1)]: the boundary counting factor of finite-depth
partition sums cancels in the difference, so scalar fixtures are exact at
every depth and every separation resolution, and the Bowen root is stable
in the resolution parameter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import DEFAULT_BUDGET, BaseChain, enumerate_base_words, sample_path, words_matrix
from .bundle import BundleSFT
from .errors import InvalidSampleCount, NoBracket, NonMonotone, SingularMatrix
from .measures import RandomMarkovMeasure, cylinder_weights, validate_measure
from .pressure import PressureEstimate, _additive_log_partition, _enumerated_log_partition
from .potentials import CocyclePotential, ScaledInverseNormPotential, _mat_norm

_MONO_TOL = 1e-9


def _log_z_batch(bundle, potential, words, depth, m, budget) -> np.ndarray:
    """Unnormalized log partition sums at the given potential depth.

    Depth 0 is the plain log cylinder count over the (m-1)-window.
    """
    add = potential.to_additive()
    L = depth + m - 1
    if add is not None or depth == 0:
        table = add.table if add is not None else np.zeros((bundle.allowed.shape[0], bundle.num_symbols))
        if L == 0:
            return np.zeros(len(words))
        arr, _ = words_matrix(words)
        return _additive_log_partition(bundle, table, arr[:, :L], depth)
    return np.array(
        [_enumerated_log_partition(bundle, potential, w.symbols[:L], depth, m, budget) for w in words]
    )


def pressure_at_t(
    chain: BaseChain,
    bundle: BundleSFT,
    cocycle: CocyclePotential,
    t: float,
    n: int,
    m: int,
    mode: str = "exact",
    samples: int = 0,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
) -> PressureEstimate:
    """Depth-increment pressure of the scaled inverse-norm family at scale t."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    potential = ScaledInverseNormPotential(cocycle, t)
    L = n + m - 1
    if mode == "exact":
        hi_words = enumerate_base_words(chain, L, budget=budget)
        hi = _log_z_batch(bundle, potential, hi_words, n, m, budget)
        hi_probs = np.array([w.probability for w in hi_words])
        e_hi = float(np.dot(hi_probs, hi))
        if n + m - 2 >= 1:
            lo_words = enumerate_base_words(chain, n + m - 2, budget=budget)
            lo = _log_z_batch(bundle, potential, lo_words, n - 1, m, budget)
            lo_probs = np.array([w.probability for w in lo_words])
            e_lo = float(np.dot(lo_probs, lo))
        else:
            e_lo = 0.0
        return PressureEstimate(n=n, m=m, value=e_hi - e_lo, mode="exact")
    if mode == "monte_carlo":
        if samples < 1:
            raise InvalidSampleCount(f"samples must be >= 1, got {samples}")
        words = [sample_path(chain, L, seed=(seed, i)) for i in range(samples)]
        hi = _log_z_batch(bundle, potential, words, n, m, budget)
        lo = _log_z_batch(bundle, potential, words, n - 1, m, budget)
        incs = hi - lo
        value = float(np.mean(incs))
        std_error = float(np.std(incs, ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
        return PressureEstimate(n=n, m=m, value=value, mode="monte_carlo",
                                std_error=std_error, samples=samples, seed=seed)
    raise ValueError(f"unknown mode {mode!r}")


def _generators_conformal(cocycle: CocyclePotential) -> bool:
    if cocycle.dim == 1:
        return True
    B = cocycle.matrices
    for s in range(B.shape[0]):
        for a in range(B.shape[1]):
            M = B[s, a]
            try:
                Minv = np.linalg.inv(M)
            except np.linalg.LinAlgError:
                return False
            if np.linalg.norm(M, 2) * np.linalg.norm(Minv, 2) > 1.0 + 1e-9:
                return False
    return True


@dataclass(frozen=True)
class DimensionRoot:
    t_star: float
    bracket: tuple[float, float]
    pressure_at_root: float
    iterations: tuple[tuple[float, float], ...]  # (t midpoint, pressure)
    converged: bool
    upper_estimate: bool  # True when conformality could not be certified


def dimension_root(
    chain: BaseChain,
    bundle: BundleSFT,
    cocycle: CocyclePotential,
    n: int,
    m: int,
    t_max: float,
    tol_t: float = 1e-8,
    tol_p: float = 1e-9,
    mode: str = "exact",
    samples: int = 0,
    seed: int = 0,
    budget: int = DEFAULT_BUDGET,
    max_iter: int = 60,
) -> DimensionRoot:
    """Bisection root of the monotone map t -> pressure_at_t."""

    def p_of(t: float) -> float:
        return pressure_at_t(chain, bundle, cocycle, t, n, m, mode=mode,
                             samples=samples, seed=seed, budget=budget).value

    probes = np.linspace(0.0, t_max, 5)
    pvals = [p_of(float(t)) for t in probes]
    for a, b in zip(pvals, pvals[1:]):
        if b > a + _MONO_TOL:
            raise NonMonotone(f"pressure increased along t: {a} -> {b}")
    p0, pmax = pvals[0], pvals[-1]
    if abs(p0) <= tol_p:
        # Zero fiber entropy: the root sits at the left endpoint.
        return DimensionRoot(
            t_star=0.0, bracket=(0.0, 0.0), pressure_at_root=p0,
            iterations=(), converged=True,
            upper_estimate=not _generators_conformal(cocycle),
        )
    if not (p0 > 0.0 >= pmax):
        raise NoBracket(f"pressure_at_t(0)={p0}, pressure_at_t({t_max})={pmax} do not straddle 0")
    lo, hi = 0.0, t_max
    t_star = 0.5 * (lo + hi)
    p_star = p_of(t_star)
    iterations: list[tuple[float, float]] = [(t_star, p_star)]
    for _ in range(max_iter):
        if hi - lo <= tol_t and abs(p_star) <= tol_p:
            break
        if p_star > 0.0:
            lo = t_star
        else:
            hi = t_star
        t_star = 0.5 * (lo + hi)
        p_star = p_of(t_star)
        iterations.append((t_star, p_star))
    return DimensionRoot(
        t_star=t_star,
        bracket=(lo, hi),
        pressure_at_root=p_star,
        iterations=tuple(iterations),
        converged=bool(hi - lo <= tol_t and abs(p_star) <= tol_p),
        upper_estimate=not _generators_conformal(cocycle),
    )


def lyapunov_spread(
    chain: BaseChain,
    bundle: BundleSFT,
    cocycle: CocyclePotential,
    meas: RandomMarkovMeasure,
    n: int,
    budget: int = DEFAULT_BUDGET,
) -> tuple[float, float, float]:
    """Top/bottom exponent estimates at depth n and their spread.

    Top averages log of the product norm, bottom averages log of the co-norm
    m(A) = ||A^{-1}||^{-1}; the spread is a conformality diagnostic for the
    tested measure and depth only.
    """
    rep = validate_measure(meas, chain, bundle)
    if not rep.valid:
        raise ValueError(f"measure fails validation: {rep}")
    top = 0.0
    bottom = 0.0
    for word in enumerate_base_words(chain, n, budget=budget):
        fibers, weights = cylinder_weights(meas, word.symbols)
        for w, wgt in zip(fibers, weights):
            P = cocycle.product(word.symbols, w, n)
            try:
                Pinv = np.linalg.inv(P)
            except np.linalg.LinAlgError as exc:
                raise SingularMatrix(str(exc)) from exc
            scale = word.probability * float(wgt)
            top += scale * float(np.log(_mat_norm(P, cocycle.norm_kind)))
            bottom += scale * float(-np.log(_mat_norm(Pinv, cocycle.norm_kind)))
    return top / n, bottom / n, (top - bottom) / n
