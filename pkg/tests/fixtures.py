"""Shared fixture systems and independent oracles for the test suite."""

import math

import numpy as np

from randpress import (
    AdditivePotential,
    BaseChain,
    BundleSFT,
    CocyclePotential,
    RandomMarkovMeasure,
    stationary_distribution,
)

GOLDEN = (1 + math.sqrt(5)) / 2
E = math.e


def one_state_chain():
    return BaseChain.from_transition([[1.0]])


def bernoulli_chain():
    return BaseChain.from_transition([[0.5, 0.5], [0.5, 0.5]])


def full_shift_bundle(num_base_symbols=1, num_fiber_symbols=2):
    return BundleSFT.from_matrices(
        np.ones((num_base_symbols, num_fiber_symbols, num_fiber_symbols), dtype=int)
    )


def fix_a():
    """1-state base, full 2-shift, phi(0)=0 / phi(1)=1; pressure log(1+e)."""
    chain = one_state_chain()
    bundle = full_shift_bundle()
    potential = AdditivePotential(np.array([[0.0, 1.0]]))
    return chain, bundle, potential


def golden_mean():
    """1-state base, golden-mean SFT, zero potential; pressure log golden ratio."""
    chain = one_state_chain()
    bundle = BundleSFT.from_matrices(np.array([[[1, 1], [1, 0]]]))
    potential = AdditivePotential(np.zeros((1, 2)))
    return chain, bundle, potential


def fix_b():
    """Bernoulli(1/2) base; 2 fiber choices under s0, 3 under s1; zero potential."""
    chain = bernoulli_chain()
    allowed = np.zeros((2, 3, 3), dtype=int)
    allowed[0, :, :2] = 1
    allowed[1, :, :] = 1
    bundle = BundleSFT.from_matrices(allowed)
    potential = AdditivePotential(np.zeros((2, 3)))
    return chain, bundle, potential


FIX_B_LIMIT = 0.5 * (math.log(2) + math.log(3))


def fix_d():
    """1-state base, full 2-shift, diagonal 2x2 cocycle under max-row-sum norm."""
    chain = one_state_chain()
    bundle = full_shift_bundle()
    alphas, betas = (0.0, 1.0), (0.5, 0.2)
    B = np.zeros((1, 2, 2, 2))
    for a in range(2):
        B[0, a] = np.diag([math.exp(alphas[a]), math.exp(betas[a])])
    return chain, bundle, CocyclePotential(B, norm_kind="max_row_sum")


FIX_D_PRESSURE = max(math.log(1 + E), math.log(math.exp(0.5) + math.exp(0.2)))


def fix_e():
    """1-state base, full 2-shift, scalar cocycle 3; Bowen root log2/log3."""
    chain = one_state_chain()
    bundle = full_shift_bundle()
    return chain, bundle, CocyclePotential(np.full((1, 2, 1, 1), 3.0))


def fix_f():
    """Bernoulli base; fiber/scale (2, 3) under s0 and (3, 4) under s1.

    Bowen root log6/log12.
    """
    chain, bundle, _ = fix_b()
    B = np.zeros((2, 3, 1, 1))
    B[0, :, 0, 0] = 3.0
    B[1, :, 0, 0] = 4.0
    return chain, bundle, CocyclePotential(B)


def gibbs_measure_fix_a():
    """Bernoulli measure with weights proportional to exp(phi)."""
    q1 = E / (1 + E)
    rows = np.array([[[1 - q1, q1], [1 - q1, q1]]])
    return RandomMarkovMeasure(initial=np.array([[1 - q1, q1]]), transition=rows)


def parry_measure():
    """Maximal-entropy Markov measure of the golden-mean shift."""
    Q = np.array([[[1 / GOLDEN, 1 / GOLDEN ** 2], [1.0, 0.0]]])
    pi = np.array([[GOLDEN ** 2 / (1 + GOLDEN ** 2), 1 / (1 + GOLDEN ** 2)]])
    return RandomMarkovMeasure(initial=pi, transition=Q)


def uniform_measure(num_base_symbols=1, num_fiber_symbols=2):
    A = num_fiber_symbols
    return RandomMarkovMeasure(
        initial=np.full((num_base_symbols, A), 1.0 / A),
        transition=np.full((num_base_symbols, A, A), 1.0 / A),
    )


def random_chain(rng, num_states=2):
    T = rng.uniform(0.2, 1.0, (num_states, num_states))
    return BaseChain.from_transition(T / T.sum(axis=1, keepdims=True))


def random_bundle(rng, num_states=2, num_symbols=2, full=False):
    """Random SFT bundle with no zero rows (drops at most one entry per row)."""
    M = np.ones((num_states, num_symbols, num_symbols), dtype=int)
    if not full and num_symbols > 1:
        for s in range(num_states):
            for a in range(num_symbols):
                if rng.random() < 0.3:
                    M[s, a, rng.integers(num_symbols)] = 0
    return BundleSFT.from_matrices(M)


def random_additive(rng, num_states, num_symbols, scale=1.0):
    return AdditivePotential(scale * rng.normal(size=(num_states, num_symbols)))


def random_cocycle(rng, num_states, num_symbols, dim=2, norm_kind="spectral"):
    """Random well-conditioned invertible cocycle generators."""
    B = rng.normal(size=(num_states, num_symbols, dim, dim)) + 3.0 * np.eye(dim)
    return CocyclePotential(B, norm_kind=norm_kind)


def shared_q_measure(rng, chain, bundle):
    """Random valid measure: one Q under every base symbol, pi its stationary.

    The shared rows are supported inside the intersection of the per-symbol
    admissibility matrices, so support and consistency both hold exactly.
    """
    inter = bundle.allowed.min(axis=0).astype(float)
    if (inter.sum(axis=1) == 0).any():
        raise ValueError("support intersection has a zero row")
    Q = inter * rng.uniform(0.1, 1.0, inter.shape)
    Q = Q / Q.sum(axis=1, keepdims=True)
    # Stationary vector of Q restricted to its recurrent communicating part.
    pi = _stationary_of(Q)
    S = chain.num_states
    return RandomMarkovMeasure(
        initial=np.tile(pi, (S, 1)), transition=np.tile(Q, (S, 1, 1))
    )


def _stationary_of(Q):
    try:
        return stationary_distribution(Q)
    except Exception:
        # Reducible support (e.g. an unreachable column): power-iterate instead.
        pi = np.full(Q.shape[0], 1.0 / Q.shape[0])
        for _ in range(20000):
            nxt = pi @ Q
            if np.max(np.abs(nxt - pi)) < 1e-15:
                break
            pi = nxt
        return nxt / nxt.sum()


def naive_metric(x, y):
    """d(x, y) = 2^{-first disagreement index}, straight from the definition."""
    for k, (a, b) in enumerate(zip(x, y)):
        if a != b:
            return 2.0 ** (-k)
    return 0.0


def naive_separated(x, y, n, m):
    """max_{k<n} d(shift^k x, shift^k y) / 2^{-m} > 1, by direct evaluation."""
    eps = 2.0 ** (-m)
    return max(naive_metric(x[k:], y[k:]) for k in range(n)) / eps > 1.0


def naive_fiber_words(bundle, base_symbols, length):
    """Recursive enumeration of admissible fiber words, independent of the DFS."""
    if length == 1:
        return [(a,) for a in range(bundle.num_symbols)]
    out = []
    for prefix in naive_fiber_words(bundle, base_symbols, length - 1):
        for b in range(bundle.num_symbols):
            if bundle.allowed[base_symbols[length - 2], prefix[-1], b]:
                out.append(prefix + (b,))
    return out


def separated_set_oracle(bundle, potential, base_symbols, n, m, length):
    """Exhaustive maximal-separated-set partition sum, from first principles.

    Enumerates all admissible fiber words of the given length, groups them
    into non-separation classes (verified to be cliques, i.e. the relation is
    transitive on the candidate set), takes the best representative per class
    and returns log sum exp(f_n) over those representatives.
    """
    words = naive_fiber_words(bundle, base_symbols, length)
    classes = []
    for w in words:
        for cls in classes:
            if not naive_separated(w, cls[0], n, m):
                cls.append(w)
                break
        else:
            classes.append([w])
    for cls in classes:
        for x in cls:
            for y in cls:
                assert not naive_separated(x, y, n, m) or x == y
    best = [max(potential.eval(base_symbols, w, n) for w in cls) for cls in classes]
    peak = max(best)
    return peak + math.log(sum(math.exp(v - peak) for v in best))
