"""Experiment configuration: YAML key tree -> validated model objects."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from .base import BaseChain
from .bundle import BundleSFT
from .errors import ConfigError
from .measures import RandomMarkovMeasure, solve_consistent_initial
from .potentials import AdditivePotential, CocyclePotential, ScaledInverseNormPotential

VERBS = ("pressure", "vp-check", "lemmas", "dimension", "convergence", "diagnose")

BUDGET_ENV = "RANDPRESS_BUDGET"


def _need(tree: dict, key: str, path: str) -> Any:
    if not isinstance(tree, dict) or key not in tree:
        raise ConfigError(f"missing config key: {path}.{key}")
    return tree[key]


def _per_state_table(spec, states, path) -> list:
    """Accept either a list in state order or a mapping keyed by state name."""
    if isinstance(spec, dict):
        try:
            return [spec[name] for name in states]
        except KeyError as exc:
            raise ConfigError(f"{path}: missing entry for state {exc.args[0]!r}") from exc
    if isinstance(spec, list):
        if len(spec) != len(states):
            raise ConfigError(f"{path}: expected {len(states)} entries, got {len(spec)}")
        return spec
    raise ConfigError(f"{path}: expected list or mapping")


@dataclass(frozen=True)
class RunSettings:
    verb: str
    n_list: tuple[int, ...]
    m_list: tuple[int, ...]
    N: int
    mode: str
    samples: int
    seed: int
    budget: int
    t_max: float
    tol_t: float
    tol_p: float
    iter_cap: int
    random_checks: int
    threads: int


@dataclass(frozen=True)
class Experiment:
    chain: BaseChain
    bundle: BundleSFT
    potential: object
    measures: tuple[RandomMarkovMeasure, ...]
    run: RunSettings
    output_dir: str
    resolved: dict = field(repr=False, default_factory=dict)


def _build_chain(tree: dict) -> BaseChain:
    transition = np.asarray(_need(tree, "transition", "base"), dtype=float)
    states = tree.get("states")
    try:
        return BaseChain.from_transition(transition, states=states)
    except Exception as exc:
        raise ConfigError(f"base: {exc}") from exc


def _build_bundle(tree: dict, chain: BaseChain) -> BundleSFT:
    alphabet = tree.get("alphabet")
    allowed = _per_state_table(_need(tree, "allowed", "bundle"), chain.states, "bundle.allowed")
    try:
        return BundleSFT.from_matrices(np.asarray(allowed), alphabet=alphabet,
                                       strict=bool(tree.get("strict", False)))
    except Exception as exc:
        raise ConfigError(f"bundle: {exc}") from exc


def _build_potential(tree: dict, chain: BaseChain, bundle: BundleSFT):
    kind = _need(tree, "kind", "potential")
    if kind == "additive":
        phi = _per_state_table(_need(tree, "phi", "potential"), chain.states, "potential.phi")
        table = np.asarray(phi, dtype=float)
        if table.shape != (chain.num_states, bundle.num_symbols):
            raise ConfigError(f"potential.phi: expected shape {(chain.num_states, bundle.num_symbols)}")
        return AdditivePotential(table)
    if kind in ("cocycle", "scaled_inverse"):
        mats = _per_state_table(_need(tree, "matrices", "potential"), chain.states, "potential.matrices")
        B = np.asarray(mats, dtype=float)
        if B.ndim == 2:  # scalar cocycle given as an (S, A) table
            B = B[:, :, None, None]
        if B.ndim != 4 or B.shape[:2] != (chain.num_states, bundle.num_symbols):
            raise ConfigError("potential.matrices: leading shape must be (states, alphabet)")
        cocycle = CocyclePotential(B, norm_kind=tree.get("norm", "spectral"))
        if kind == "cocycle":
            return cocycle
        return ScaledInverseNormPotential(cocycle, float(tree.get("t", 0.0)))
    raise ConfigError(f"potential.kind: unknown kind {kind!r}")


def _build_measures(specs, chain: BaseChain, bundle: BundleSFT) -> tuple[RandomMarkovMeasure, ...]:
    out = []
    for i, spec in enumerate(specs or []):
        path = f"measures[{i}]"
        Q = np.asarray(
            _per_state_table(_need(spec, "transition", path), chain.states, f"{path}.transition"),
            dtype=float,
        )
        if spec.get("auto", False):
            pi, _resid = solve_consistent_initial(Q, chain)
        else:
            pi = np.asarray(
                _per_state_table(_need(spec, "initial", path), chain.states, f"{path}.initial"),
                dtype=float,
            )
        out.append(RandomMarkovMeasure(initial=pi, transition=Q))
    return tuple(out)


def _build_run(tree: dict) -> RunSettings:
    verb = _need(tree, "verb", "run")
    if verb not in VERBS:
        raise ConfigError(f"run.verb: must be one of {VERBS}, got {verb!r}")
    default_budget = int(os.environ.get(BUDGET_ENV, 2_000_000))
    n_list = tuple(int(n) for n in tree.get("n_list", [8]))
    m_list = tuple(int(m) for m in tree.get("m_list", [1]))
    if not n_list or not m_list:
        raise ConfigError("run.n_list and run.m_list must be nonempty")
    return RunSettings(
        verb=verb,
        n_list=n_list,
        m_list=m_list,
        N=int(tree.get("N", max(n_list))),
        mode=tree.get("mode", "exact"),
        samples=int(tree.get("samples", 0)),
        seed=int(tree.get("seed", 0)),
        budget=int(tree.get("budget", default_budget)),
        t_max=float(tree.get("t_max", 4.0)),
        tol_t=float(tree.get("tol_t", 1e-8)),
        tol_p=float(tree.get("tol_p", 1e-9)),
        iter_cap=int(tree.get("iter_cap", 500)),
        random_checks=int(tree.get("random_checks", 100)),
        threads=int(tree.get("threads", 1)),
    )


def apply_overrides(tree: dict, overrides: list[str]) -> dict:
    """Apply flat --set path=value overrides (values parsed as YAML)."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form path=value")
        path, raw = item.split("=", 1)
        keys = path.split(".")
        node = tree
        for key in keys[:-1]:
            if not isinstance(node, dict):
                raise ConfigError(f"override path {path!r} does not address a mapping")
            node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {path!r} does not address a mapping")
        node[keys[-1]] = yaml.safe_load(raw)
    return tree


def load_experiment(config_path: str, overrides: list[str] | None = None) -> Experiment:
    try:
        with open(config_path) as fh:
            tree = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {config_path}: {exc}") from exc
    if not isinstance(tree, dict):
        raise ConfigError("config root must be a mapping")
    tree = apply_overrides(tree, overrides or [])
    chain = _build_chain(_need(tree, "base", "<root>"))
    bundle = _build_bundle(_need(tree, "bundle", "<root>"), chain)
    potential = _build_potential(_need(tree, "potential", "<root>"), chain, bundle)
    measures = _build_measures(tree.get("measures"), chain, bundle)
    run = _build_run(_need(tree, "run", "<root>"))
    output_dir = (tree.get("output") or {}).get("dir", "out")
    return Experiment(
        chain=chain, bundle=bundle, potential=potential, measures=measures,
        run=run, output_dir=output_dir, resolved=tree,
    )
