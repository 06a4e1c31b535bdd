"""Controllability and observability analysis in all three representations.

Controllability iterates the reachability span: each round contracts the
dynamics against selections of k-1 current basis columns, appends the new
directions, and compresses with a compact SVD.  For even k a full-rank span
certifies strong controllability; for odd k the same test certifies
accessibility.

Observability stacks the gradients of successive Lie derivatives of the
output map.  The full-representation path builds the lift operators F_j
explicitly; the train and tree paths evaluate the same row blocks through
the RecursiveJ window-merging recursion without ever forming F_j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, ScaleError, ShapeError
from .hier_tucker import HTucker, htd_contract
from .kernels import RankTolerance, compact_svd, numerical_rank
from .tensor_core import (contract_leading, is_almost_symmetric, kron_power,
                          unfold)
from .tensor_train import TensorTrain, tt_contract

__all__ = [
    "ControllabilityResult", "ObservabilityResult",
    "controllability_full", "controllability_tt", "controllability_ht",
    "gradient_sum", "lift_operator",
    "observability_full", "observability_tt", "observability_ht",
    "recursive_j_tt", "recursive_j_ht", "observability_at_probes",
]

# Dense observability blocks grow as n^(jk); refuse beyond this entry count.
SCALE_GUARD_ENTRIES = 10_000_000


@dataclass(frozen=True)
class ControllabilityResult:
    """Reachability-span outcome.

    ``basis`` has orthonormal columns spanning the space reached by the
    iteration; the verdict vocabulary depends on the parity of k (strong
    controllability is decidable for even k only, odd k reports
    accessibility).
    """

    basis: np.ndarray
    rank: int
    verdict: str
    iterations: int


@dataclass(frozen=True)
class ObservabilityResult:
    """Rank verdict of the state-dependent observability matrix.

    ``verdict`` is True when the matrix reaches full rank n at some probe
    state; a False verdict at finitely many probes is evidence, not proof,
    of unobservability.
    """

    matrix_rank: int
    n: int
    verdict: bool
    probe_states: list = field(default_factory=list)
    depth: int = 0


def _verdict(k: int, rank: int, n: int) -> str:
    if k % 2 == 0:
        return "strongly_controllable" if rank == n else "not_controllable"
    return "accessible" if rank == n else "not_accessible"


def _reachability(n: int, k: int, b: np.ndarray, candidate_fn,
                  tol: RankTolerance | None,
                  use_multisets: bool) -> ControllabilityResult:
    """Shared reachability iteration with compact-SVD compression.

    ``candidate_fn(columns)`` maps a length k-1 column selection to the
    contracted direction(s).  Stops at full rank, at rank stagnation (the
    candidates depend on the span only, so a stalled rank is a fixed
    point), or after n rounds.
    """
    basis = compact_svd(b, tol).U
    rank = basis.shape[1]
    iterations = 0
    while rank < n and iterations < n:
        cols = [basis[:, j] for j in range(rank)]
        if use_multisets:
            selections = itertools.combinations_with_replacement(cols, k - 1)
        else:
            selections = itertools.product(cols, repeat=k - 1)
        new_cols = [candidate_fn(sel) for sel in selections]
        iterations += 1
        if not new_cols:
            break
        stacked = np.column_stack([basis] + new_cols) if rank else \
            np.column_stack(new_cols)
        svd = compact_svd(stacked, tol)
        basis = svd.U
        if svd.rank == rank:
            break
        rank = svd.rank
    return ControllabilityResult(basis, rank, _verdict(k, rank, n), iterations)


def controllability_full(tensor: np.ndarray, b: np.ndarray,
                         tol: RankTolerance | None = None
                         ) -> ControllabilityResult:
    """Reachability span of the dense tensor with control matrix B.

    Candidate directions are A v_1 ... v_{k-1} over selections of current
    basis columns: multisets when the tensor is almost symmetric (ordered
    selections would duplicate columns), full tuples otherwise.
    """
    tensor = np.asarray(tensor, dtype=float)
    dims = set(tensor.shape)
    if len(dims) != 1:
        raise ShapeError(f"tensor is not cubical: shape {tensor.shape}")
    n, k = tensor.shape[0], tensor.ndim
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if b.shape[0] != n:
        raise ShapeError(f"B must have {n} rows, got {b.shape}")
    multisets = is_almost_symmetric(tensor, 1e-9)
    return _reachability(
        n, k, b, lambda sel: contract_leading(tensor, sel), tol, multisets)


def controllability_tt(train: TensorTrain, b: np.ndarray,
                       tol: RankTolerance | None = None
                       ) -> ControllabilityResult:
    """Reachability span computed through train contractions only."""
    dims = set(train.dims)
    if len(dims) != 1:
        raise ShapeError(f"train is not cubical: dims {train.dims}")
    n, k = train.dims[0], train.order
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if b.shape[0] != n:
        raise ShapeError(f"B must have {n} rows, got {b.shape}")
    return _reachability(
        n, k, b, lambda sel: tt_contract(train, sel).ravel(), tol, True)


def controllability_ht(ht: HTucker, b: np.ndarray,
                       tol: RankTolerance | None = None
                       ) -> ControllabilityResult:
    """Reachability span computed through leaf-substituted tree sweeps."""
    if len(set(ht.dims)) != 1:
        raise ShapeError(f"representation is not cubical: dims {ht.dims}")
    n, k = ht.dims[0], len(ht.dims)
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if b.shape[0] != n:
        raise ShapeError(f"B must have {n} rows, got {b.shape}")
    return _reachability(
        n, k, b, lambda sel: htd_contract(ht, sel).ravel(), tol, True)


def gradient_sum(x: np.ndarray, m: int) -> np.ndarray:
    """Jacobian factor of the Kronecker power: sum over q of
    x^[q-1] kron I kron x^[m-q], an n^m x n matrix; m = 1 gives I."""
    if m < 1:
        raise ArgumentError("power must be >= 1")
    x = np.asarray(x, dtype=float).ravel()
    n = x.shape[0]
    eye = np.eye(n)
    total = np.zeros((n ** m, n))
    for q in range(1, m + 1):
        left = kron_power(x, q - 1).reshape(-1, 1)
        right = kron_power(x, m - q).reshape(-1, 1)
        total += np.kron(left, np.kron(eye, right))
    return total


def lift_operator(a_k: np.ndarray, j: int, k: int) -> np.ndarray:
    """Lift operator F_j threading the unfolding through Kronecker slots.

    F_j = sum over i of I^[i-1] kron A_(k) kron I^[L-i] with
    L = (j-1)k - 2j + 3 slots, mapping x^[jk-2j+1] variables to the
    previous Lie-derivative level.  Shapes are guarded against blow-up.
    """
    if j < 2:
        raise ArgumentError("lift operators are defined for j >= 2")
    a_k = np.atleast_2d(np.asarray(a_k, dtype=float))
    n = a_k.shape[0]
    if a_k.shape[1] != n ** (k - 1):
        raise ShapeError(f"A_(k) must be n x n^(k-1), got {a_k.shape}")
    slots = (j - 1) * k - 2 * j + 3
    rows = n ** slots
    cols = n ** (j * k - 2 * j + 1)
    if rows * cols > SCALE_GUARD_ENTRIES:
        raise ScaleError(
            f"F_{j} would hold {rows * cols} entries; use the tt/ht path")
    total = np.zeros((rows, cols))
    for i in range(1, slots + 1):
        total += np.kron(np.eye(n ** (i - 1)),
                         np.kron(a_k, np.eye(n ** (slots - i))))
    return total


def _observability_verdict(blocks, n: int, tol, x, depth) -> ObservabilityResult:
    stacked = np.vstack(blocks)
    rank = numerical_rank(stacked, tol)
    return ObservabilityResult(rank, n, rank == n,
                               [np.asarray(x, dtype=float).ravel()], depth)


def _check_depth(n: int, k: int, depth: int | None, guard_dense: bool):
    if depth is None:
        depth = n - 1
        if guard_dense:
            while depth > 0 and _dense_block_entries(n, k, depth) > SCALE_GUARD_ENTRIES:
                depth -= 1
    if depth < 0 or depth > n - 1:
        raise ArgumentError(f"depth must be in 0..{n - 1}, got {depth}")
    return depth


def _dense_block_entries(n: int, k: int, j: int) -> int:
    m_j = j * k - 2 * j + 1
    f_cols = n ** m_j
    f_rows = n ** ((j - 1) * k - 2 * (j - 1) + 1) if j >= 2 else n
    return max(f_rows * f_cols, n ** m_j * n)


def observability_full(tensor: np.ndarray, c: np.ndarray, x: np.ndarray,
                       depth: int | None = None,
                       tol: RankTolerance | None = None
                       ) -> ObservabilityResult:
    """State-dependent observability matrix rank at a probe state.

    Row block j is C A_(k) F_2 ... F_j times the Kronecker-power gradient of
    x^[jk-2j+1]; block 0 is C itself.  ``depth`` defaults to n-1 capped by
    the dense scale guard; an explicit depth beyond the guard raises.
    """
    tensor = np.asarray(tensor, dtype=float)
    if len(set(tensor.shape)) != 1:
        raise ShapeError(f"tensor is not cubical: shape {tensor.shape}")
    n, k = tensor.shape[0], tensor.ndim
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if c.shape[1] != n:
        raise ShapeError(f"C must have {n} columns, got {c.shape}")
    x = np.asarray(x, dtype=float).ravel()
    explicit = depth is not None
    depth = _check_depth(n, k, depth, guard_dense=True)
    if explicit and depth >= 1 \
            and _dense_block_entries(n, k, depth) > SCALE_GUARD_ENTRIES:
        raise ScaleError("requested depth exceeds the dense scale guard; "
                         "use the tt/ht path")

    a_k = unfold(tensor, {k})
    blocks = [c]
    prefix = a_k
    for j in range(1, depth + 1):
        if j >= 2:
            prefix = prefix @ lift_operator(a_k, j, k)
        blocks.append(c @ prefix @ gradient_sum(x, j * k - 2 * j + 1))
    return _observability_verdict(blocks, n, tol, x, depth)


def _recursive_j(contract, n: int, k: int, j: int, z: list) -> np.ndarray:
    expected = j * k - 2 * j + 1
    if len(z) != expected:
        raise ArgumentError(f"level-{j} lists hold {expected} elements, "
                            f"got {len(z)}")
    if j == 1:
        return contract(z)
    out = None
    merged_len = (j - 1) * k - 2 * (j - 1) + 1
    for i in range(merged_len):
        window = z[i:i + k - 1]
        zhat = contract(window)
        merged = z[:i] + [zhat] + z[i + k - 1:]
        term = _recursive_j(contract, n, k, j - 1, merged)
        out = term if out is None else out + term
    return out


def recursive_j_tt(train: TensorTrain, j: int, z: list) -> np.ndarray:
    """RecursiveJ on the train: sliding windows of k-1 list elements are
    contracted into single entries until one contraction remains."""
    n, k = train.dims[0], train.order
    return _recursive_j(lambda w: tt_contract(train, w), n, k, j, list(z))


def recursive_j_ht(ht: HTucker, j: int, z: list) -> np.ndarray:
    """RecursiveJ on the tree, merging windows through leaf substitution."""
    n, k = ht.dims[0], len(ht.dims)
    return _recursive_j(lambda w: htd_contract(ht, w), n, k, j, list(z))


def _observability_low_rank(contract, n: int, k: int, c, x, depth, tol):
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if c.shape[1] != n:
        raise ShapeError(f"C must have {n} columns, got {c.shape}")
    x = np.asarray(x, dtype=float).ravel()
    depth = _check_depth(n, k, depth, guard_dense=False)
    eye = np.eye(n)
    blocks = [c]
    for j in range(1, depth + 1):
        m_j = j * k - 2 * j + 1
        total = np.zeros((n, n))
        for q in range(1, m_j + 1):
            z = [x] * (q - 1) + [eye] + [x] * (m_j - q)
            total = total + _recursive_j(contract, n, k, j, z)
        blocks.append(c @ total)
    return _observability_verdict(blocks, n, tol, x, depth)


def observability_tt(train: TensorTrain, c: np.ndarray, x: np.ndarray,
                     depth: int | None = None,
                     tol: RankTolerance | None = None) -> ObservabilityResult:
    """Observability rank computed through train contractions only."""
    if len(set(train.dims)) != 1:
        raise ShapeError(f"train is not cubical: dims {train.dims}")
    n, k = train.dims[0], train.order
    return _observability_low_rank(
        lambda w: tt_contract(train, w), n, k, c, x, depth, tol)


def observability_ht(ht: HTucker, c: np.ndarray, x: np.ndarray,
                     depth: int | None = None,
                     tol: RankTolerance | None = None) -> ObservabilityResult:
    """Observability rank computed through tree contractions only."""
    if len(set(ht.dims)) != 1:
        raise ShapeError(f"representation is not cubical: dims {ht.dims}")
    n, k = ht.dims[0], len(ht.dims)
    return _observability_low_rank(
        lambda w: htd_contract(ht, w), n, k, c, x, depth, tol)


def observability_at_probes(observe, probes, **kwargs) -> ObservabilityResult:
    """Evaluate an observability routine at several probe states.

    A full-rank outcome at any probe settles the generic (open dense set)
    verdict; otherwise the result records the best rank seen and every
    probe tested.
    """
    best: ObservabilityResult | None = None
    states = []
    for x in probes:
        res = observe(x=x, **kwargs)
        states.append(np.asarray(x, dtype=float).ravel())
        if best is None or res.matrix_rank > best.matrix_rank:
            best = res
        if best.verdict:
            break
    if best is None:
        raise ArgumentError("at least one probe state is required")
    return ObservabilityResult(best.matrix_rank, best.n, best.verdict,
                               states, best.depth)
