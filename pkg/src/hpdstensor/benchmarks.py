"""Random instance generation and memory/timing comparisons.

The three generation schemes mirror the numerical-experiment setup: fully
symmetric dense tensors, tensors built from low-rank trains, and tensors
built from low-rank trees.  Memory reports compare exact parameter counts;
timing reports measure controllability-matrix construction per
representation and refuse to record a run whose representations disagree on
the reachable rank.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .analysis import (controllability_full, controllability_ht,
                       controllability_tt)
from .errors import ArgumentError, NumericError, ScaleError
from .hier_tucker import (DimensionTree, HTucker, build_tree, htd_decompose,
                          htd_param_count, htd_reconstruct)
from .kernels import RankTolerance, numerical_rank
from .randomness import generator
from .tensor_core import unfold
from .tensor_train import (TensorTrain, tt_decompose, tt_param_count,
                           tt_reconstruct)

__all__ = ["SCHEMES", "BenchRecord", "Instance", "gen_instance",
           "memory_report", "timing_report"]

SCHEMES = ("symmetric", "low_tt", "low_ht")
DENSE_GUARD = 10_000_000


@dataclass(frozen=True)
class BenchRecord:
    scheme: str
    n: int
    k: int
    repr: str
    params: int
    elapsed_ms: float
    rank: int
    seed: int


@dataclass(frozen=True)
class Instance:
    """One generated dynamic tensor in every available representation."""

    scheme: str
    n: int
    k: int
    seed: int
    dense: np.ndarray | None
    tt: TensorTrain | None
    ht: HTucker | None


def _symmetric_dense(n: int, k: int, seed: int) -> np.ndarray:
    """Fully symmetric tensor: one uniform value per index multiset."""
    g = generator(seed)
    values = {multiset: g.random() * 2.0 - 1.0
              for multiset in combinations_with_replacement(range(n), k)}
    tensor = np.zeros((n,) * k)
    for idx in np.ndindex(*tensor.shape):
        tensor[idx] = values[tuple(sorted(idx))]
    return tensor


def _random_tt(n: int, k: int, rank_cap: int, seed: int) -> TensorTrain:
    g = generator(seed)
    ranks = [1] + [min(rank_cap, n ** p, n ** (k - p)) for p in range(1, k)] + [1]
    cores = [g.random((ranks[p], n, ranks[p + 1])) * 2.0 - 1.0
             for p in range(k)]
    return TensorTrain(tuple(cores))


def _random_ht(n: int, k: int, rank_cap: int, seed: int,
               tree: DimensionTree | None = None) -> HTucker:
    g = generator(seed)
    if tree is None:
        tree = build_tree(k)

    def node_rank(node):
        if node is tree.root:
            return 1
        size = len(node.modes)
        return min(rank_cap, n ** size, n ** (k - size))

    leaf_factors = {}
    transfer = {}
    for node, _ in tree.walk():
        if node.is_leaf:
            leaf_factors[node.modes[0]] = g.random((n, node_rank(node))) * 2 - 1
        else:
            rows = node_rank(node.left) * node_rank(node.right)
            transfer[node.modes] = g.random((rows, node_rank(node))) * 2 - 1
    return HTucker(tree, (n,) * k, leaf_factors, transfer)


def gen_instance(scheme: str, n: int, k: int, rank_cap: int = 2,
                 seed: int = 0, tol: RankTolerance | None = None) -> Instance:
    """Generate one instance and decompose it into the other representations.

    The dense tensor is the interchange form, so the guard refuses sizes
    whose dense materialization exceeds the desk-scale limit.  Decomposed
    ranks are measured from the dense tensor, not assumed from the caps.
    """
    if scheme not in SCHEMES:
        raise ArgumentError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    if rank_cap < 1:
        raise ArgumentError("rank_cap must be >= 1")
    if n ** k > DENSE_GUARD:
        raise ScaleError(f"dense interchange needs n^k = {n ** k} entries")
    if scheme == "symmetric":
        dense = _symmetric_dense(n, k, seed)
    elif scheme == "low_tt":
        dense = tt_reconstruct(_random_tt(n, k, rank_cap, seed))
    else:
        dense = htd_reconstruct(_random_ht(n, k, rank_cap, seed))
    return Instance(scheme, n, k, seed, dense,
                    tt_decompose(dense, tol=tol), htd_decompose(dense, tol=tol))


def _representation_rank(inst: Instance, repr_name: str) -> int:
    if repr_name == "full":
        return numerical_rank(unfold(inst.dense, {inst.k}))
    if repr_name == "tt":
        return max(inst.tt.ranks)
    return inst.ht.max_rank()


def memory_report(n: int, k_list, schemes=SCHEMES, rank_cap: int = 2,
                  seed: int = 0) -> list[BenchRecord]:
    """Exact parameter counts per representation per scheme and order.

    The rank column records the representation's own maximal rank (the
    k-mode unfolding rank for the full form).
    """
    records = []
    for scheme in schemes:
        for k in k_list:
            inst = gen_instance(scheme, n, int(k), rank_cap, seed)
            counts = {"full": n ** int(k),
                      "tt": tt_param_count(inst.tt),
                      "ht": htd_param_count(inst.ht)}
            for repr_name, params in counts.items():
                records.append(BenchRecord(scheme, n, int(k), repr_name,
                                           int(params), 0.0,
                                           _representation_rank(inst, repr_name),
                                           seed))
    return records


def _controllability_backends(inst: Instance, b: np.ndarray,
                              tol: RankTolerance | None):
    backends = {}
    if inst.dense is not None:
        backends["full"] = lambda: controllability_full(inst.dense, b, tol)
    if inst.tt is not None:
        backends["tt"] = lambda: controllability_tt(inst.tt, b, tol)
    if inst.ht is not None:
        backends["ht"] = lambda: controllability_ht(inst.ht, b, tol)
    return backends


def _generate_for_timing(scheme, n, k, rank_cap, seed) -> Instance:
    """Instance for timing; beyond the dense guard only the directly
    generated representation is available (the full path is recorded absent)."""
    try:
        return gen_instance(scheme, n, k, rank_cap, seed)
    except ScaleError:
        if scheme == "low_tt":
            return Instance(scheme, n, k, seed, None,
                            _random_tt(n, k, rank_cap, seed), None)
        if scheme == "low_ht":
            return Instance(scheme, n, k, seed, None, None,
                            _random_ht(n, k, rank_cap, seed))
        raise


def timing_report(n_list, k_list, schemes=SCHEMES, m: int = 5,
                  rank_cap: int = 2, seed: int = 0, repeats: int = 3,
                  tol: RankTolerance | None = None) -> list[BenchRecord]:
    """Median wall time of controllability construction per representation.

    Runs are sequential on a monotonic clock.  Before recording, the
    representations present must agree on the reachable rank; disagreement
    raises instead of logging a bogus timing row.
    """
    if repeats < 1:
        raise ArgumentError("repeats must be >= 1")
    records = []
    for scheme in schemes:
        for n in n_list:
            n = int(n)
            for k in k_list:
                k = int(k)
                inst = _generate_for_timing(scheme, n, k, rank_cap, seed)
                b = generator(seed + 1).random((n, m)) * 2.0 - 1.0
                backends = _controllability_backends(inst, b, tol)
                ranks = {}
                times = {}
                for name, run in backends.items():
                    samples = []
                    for _ in range(repeats):
                        t0 = time.perf_counter()
                        result = run()
                        samples.append((time.perf_counter() - t0) * 1e3)
                    ranks[name] = result.rank
                    times[name] = float(np.median(samples))
                if len(set(ranks.values())) > 1:
                    raise NumericError(
                        f"rank disagreement across representations: {ranks}")
                counts = {}
                if inst.dense is not None:
                    counts["full"] = n ** k
                if inst.tt is not None:
                    counts["tt"] = tt_param_count(inst.tt)
                if inst.ht is not None:
                    counts["ht"] = htd_param_count(inst.ht)
                for name in backends:
                    records.append(BenchRecord(scheme, n, k, name,
                                               int(counts[name]),
                                               times[name], ranks[name], seed))
    return records
