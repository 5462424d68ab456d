"""Exact ground truth for small and medium graphs.

Dense linear algebra gives effective resistance (via the Laplacian
pseudoinverse), the walk spectrum, and spanning-tree counts via the
matrix-tree theorem; a direct simulation gives commute times.  These are
the oracles the estimator tests and the benchmark's error reports are
judged against, so nothing here shares code with the walk engines.

A :class:`DenseSpectrum` is built lazily per graph and cached on it:
resistance queries only ever pay for one Cholesky factorization, while
the eigendecomposition is computed the first time spectral quantities
are requested.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph import Graph

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DenseSpectrum",
    "GraphTooLargeError",
    "SpanningTreeCount",
    "adjacency_matrix",
    "laplacian_matrix",
    "transition_matrix",
    "lazy_transition_matrix",
    "spectrum",
    "effective_resistance_exact",
    "spectral_lambda",
    "count_spanning_trees",
    "commute_time_sim",
]

DEFAULT_DENSE_CAP = 20_000

_EXACT_TREE_LIMIT = 30  # integer matrix-tree determinant up to this order
_BIPARTITE_TOL = 1e-9


class GraphTooLargeError(ValueError):
    """Dense oracle refused; use the estimators for graphs this size."""


def _require_dense(g: Graph, cap: int) -> None:
    if g.n > cap:
        raise GraphTooLargeError(
            f"n={g.n} exceeds the dense-oracle cap of {cap}; "
            "use the local estimators for graphs this size"
        )


def _require_connected(g: Graph) -> None:
    if not g.connected_flag:
        raise ValueError("graph is not connected")


# ----------------------------------------------------------------------
# dense matrices
# ----------------------------------------------------------------------


def adjacency_matrix(g: Graph) -> np.ndarray:
    """Dense integer adjacency matrix; parallel edges add multiplicity."""
    a = np.zeros((g.n, g.n), dtype=np.int64)
    src = np.repeat(np.arange(g.n), np.diff(g._offsets))
    np.add.at(a, (src, g._targets.astype(np.int64)), 1)
    return a


def laplacian_matrix(g: Graph) -> np.ndarray:
    """Dense integer Laplacian (degree matrix minus adjacency matrix)."""
    a = adjacency_matrix(g)
    lap = -a
    np.fill_diagonal(lap, a.sum(axis=1))
    return lap


def transition_matrix(g: Graph) -> np.ndarray:
    """Dense simple-walk transition matrix (rows sum to 1)."""
    a = adjacency_matrix(g).astype(np.float64)
    deg = a.sum(axis=1)
    if (deg == 0).any():
        raise ValueError("transition matrix requires min degree >= 1")
    return a / deg[:, None]


def lazy_transition_matrix(g: Graph) -> np.ndarray:
    """Transition matrix of the walk that stays put with probability 1/2."""
    return 0.5 * (np.eye(g.n) + transition_matrix(g))


# ----------------------------------------------------------------------
# cached dense spectrum
# ----------------------------------------------------------------------


class DenseSpectrum:
    """Lazily materialized dense view of one graph.

    Fields appear on first use: the grounded Cholesky factor backs
    resistance queries and the pseudoinverse; the symmetric-walk
    eigendecomposition backs the spectral parameter.
    """

    def __init__(self, g: Graph):
        _require_connected(g)
        self._g = g
        self._factor = None
        self._pinv = None
        self._eigenvalues = None

    # -- solver tier ---------------------------------------------------

    def _dense_laplacian(self) -> np.ndarray:
        g = self._g
        lap = np.zeros((g.n, g.n), dtype=np.float64)
        src = np.repeat(np.arange(g.n), np.diff(g._offsets))
        np.add.at(lap, (src, g._targets.astype(np.int64)), -1.0)
        np.fill_diagonal(lap, g.degrees_array().astype(np.float64))
        return lap

    @property
    def factor(self):
        """Cholesky factor of the Laplacian grounded at vertex n-1."""
        if self._factor is None:
            lap = self._dense_laplacian()
            self._factor = scipy.linalg.cho_factor(
                lap[:-1, :-1], overwrite_a=True, check_finite=False
            )
        return self._factor

    def resistance(self, s: int, t: int) -> float:
        g = self._g
        if s == t:
            return 0.0
        ground = g.n - 1
        rhs = np.zeros(g.n - 1)
        if s != ground:
            rhs[s] = 1.0
        if t != ground:
            rhs[t] = -1.0
        x = scipy.linalg.cho_solve(self.factor, rhs, check_finite=False)
        xs = x[s] if s != ground else 0.0
        xt = x[t] if t != ground else 0.0
        return float(xs - xt)

    @property
    def laplacian(self) -> np.ndarray:
        """Integer Laplacian (row sums exactly zero)."""
        return laplacian_matrix(self._g)

    @property
    def pinv(self) -> np.ndarray:
        """Moore-Penrose pseudoinverse of the Laplacian.

        Computed by inverting on the complement of the all-ones kernel:
        (L + J/n)^{-1} - J/n, one factorization plus n solves.
        """
        if self._pinv is None:
            g = self._g
            shifted = self._dense_laplacian() + 1.0 / g.n
            cf = scipy.linalg.cho_factor(
                shifted, overwrite_a=True, check_finite=False
            )
            inv = scipy.linalg.cho_solve(cf, np.eye(g.n), check_finite=False)
            self._pinv = inv - 1.0 / g.n
        return self._pinv

    # -- spectral tier ---------------------------------------------------

    @property
    def walk_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of D^{-1/2} A D^{-1/2}, sorted descending.

        These coincide with the walk transition matrix's eigenvalues.
        """
        if self._eigenvalues is None:
            g = self._g
            a = adjacency_matrix(g).astype(np.float64)
            inv_sqrt = 1.0 / np.sqrt(g.degrees_array().astype(np.float64))
            q = a * inv_sqrt[:, None] * inv_sqrt[None, :]
            ev = scipy.linalg.eigh(q, eigvals_only=True)
            self._eigenvalues = np.sort(ev)[::-1]
        return self._eigenvalues

    @property
    def lambda_value(self) -> float:
        """max(|second largest|, |smallest|) walk eigenvalue."""
        ev = self.walk_eigenvalues
        if ev.shape[0] < 2:
            return 0.0
        return float(max(abs(ev[1]), abs(ev[-1])))

    @property
    def bipartite(self) -> bool:
        """True when the walk is periodic (smallest eigenvalue is -1)."""
        ev = self.walk_eigenvalues
        return bool(ev.shape[0] >= 2 and ev[-1] <= -1.0 + _BIPARTITE_TOL)


def spectrum(g: Graph, cap: int = DEFAULT_DENSE_CAP) -> DenseSpectrum:
    """The graph's cached :class:`DenseSpectrum` (built on first use)."""
    _require_dense(g, cap)
    if g._spectrum is None:
        g._spectrum = DenseSpectrum(g)
    return g._spectrum


# ----------------------------------------------------------------------
# the oracle operations
# ----------------------------------------------------------------------


def effective_resistance_exact(
    g: Graph, s: int, t: int, *, cap: int = DEFAULT_DENSE_CAP
) -> float:
    """Exact s-t effective resistance from the Laplacian pseudoinverse."""
    if not (0 <= s < g.n and 0 <= t < g.n):
        raise IndexError("vertex id out of range")
    return spectrum(g, cap).resistance(s, t)


def spectral_lambda(g: Graph, *, cap: int = DEFAULT_DENSE_CAP) -> float:
    """The walk's spectral parameter in [0, 1]; 1 means periodic (bipartite).

    Check :attr:`DenseSpectrum.bipartite` to distinguish periodicity from
    slow mixing before feeding this into the transition-probability
    estimators.
    """
    spec = spectrum(g, cap)
    ev = spec.walk_eigenvalues
    if abs(ev[0] - 1.0) > 1e-9:
        raise AssertionError(
            f"leading walk eigenvalue {ev[0]!r} != 1; graph not connected?"
        )
    return min(spec.lambda_value, 1.0)


@dataclass
class SpanningTreeCount:
    """Spanning-tree count; natural log always, exact integer when small.

    A disconnected graph has no spanning tree: ``log_count`` is ``-inf``
    and ``exact`` is 0.
    """

    log_count: float
    exact: int | None

    @property
    def value(self) -> float:
        return math.exp(self.log_count) if self.log_count > float("-inf") else 0.0


def count_spanning_trees(g: Graph) -> SpanningTreeCount:
    """Number of spanning trees via the matrix-tree theorem.

    Parallel edges enter through their multiplicity in the adjacency
    matrix.  The log count comes from a float log-determinant of the
    reduced Laplacian; for n <= 30 a fraction-free integer elimination
    gives the exact count as well.
    """
    if not g.connected_flag:
        return SpanningTreeCount(float("-inf"), 0)
    if g.n == 1:
        return SpanningTreeCount(0.0, 1)
    lap = laplacian_matrix(g)
    reduced = lap[1:, 1:]
    sign, logdet = np.linalg.slogdet(reduced.astype(np.float64))
    if sign <= 0:
        raise ArithmeticError("matrix-tree determinant was not positive")
    exact = None
    if g.n <= _EXACT_TREE_LIMIT:
        exact = _integer_det(reduced)
    return SpanningTreeCount(float(logdet), exact)


def _integer_det(mat: np.ndarray) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = mat.shape[0]
    if n == 0:
        return 1
    m = [[int(x) for x in row] for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def commute_time_sim(
    g: Graph,
    s: int,
    t: int,
    trials: int,
    rng: np.random.Generator,
    *,
    cap_factor: int = 10_000,
) -> float:
    """Empirical mean number of steps to go from s to t and back to s.

    Deliberately independent of the walk engines: a plain sequential
    simulation over the adjacency arrays.  A safety cap of
    ``cap_factor * m`` steps aborts a trial (with a warning); aborted
    trials are excluded from the mean.
    """
    _require_connected(g)
    if s == t:
        return 0.0
    if trials < 1:
        raise ValueError("trials must be >= 1")
    offsets = g._offsets
    targets = g._targets
    cap = cap_factor * g.m
    total = 0
    aborted = 0
    for _ in range(trials):
        cur = s
        seen_t = False
        steps = 0
        while steps < cap:
            base = offsets[cur]
            d = offsets[cur + 1] - base
            cur = int(targets[base + int(rng.random() * d)])
            steps += 1
            if cur == t:
                seen_t = True
            elif seen_t and cur == s:
                break
        else:
            aborted += 1
            continue
        total += steps
    if aborted:
        warnings.warn(
            f"{aborted} of {trials} commute trials hit the {cap}-step safety cap",
            stacklevel=2,
        )
    done = trials - aborted
    if done == 0:
        raise RuntimeError("all commute trials hit the safety cap")
    return total / done
