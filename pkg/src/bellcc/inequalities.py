"""Correlation Bell inequalities for two settings per party.

A weight table ``g`` over the ``2**n`` setting indices defines the
inequality ``sum_x g(x) E(x) <= B``.  The local-hidden-variable bound ``B`` is
found by exhaustive search over the ``4**n`` deterministic local strategies,
which is exact because the Bell expression is affine in any mixture of them.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .errors import CapacityError, DimensionError

LHV_CAP = 8
WWZB_ENUM_CAP = 4
OPTIMIZER_CAP = 8

# Per-party deterministic responses, option k -> (a(0), a(1)).
STRATEGY_OPTIONS = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=np.int64)

# s^x for x in {0, 1} (rows) and s = -1, +1 (columns, bit b = (s + 1) / 2).
_POWER_MATRIX = np.array([[1, 1], [-1, 1]], dtype=np.int64)


def _as_integral(values):
    """Return an int64 copy when every value is an exact integer, else None."""
    if np.all(np.isfinite(values)) and np.all(values == np.round(values)) and np.all(
        np.abs(values) < 2**52
    ):
        return np.round(values).astype(np.int64)
    return None


@dataclass(frozen=True)
class GTable:
    """Real weight function ``g(x)`` over the setting indices (party 1 most significant)."""

    n: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        qsim._check_n(self.n)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.shape != (2**self.n,):
            raise DimensionError(f"expected {2**self.n} weights for n={self.n}, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("weights must be finite")
        if not np.any(vals != 0):
            raise ValueError("weight table must have at least one nonzero entry")
        object.__setattr__(self, "values", qsim._frozen(vals))

    @property
    def integral_values(self):
        """int64 copy of the weights, or None if they are not all integers."""
        return _as_integral(self.values)

    @property
    def total_weight(self):
        ints = self.integral_values
        if ints is not None:
            return int(np.abs(ints).sum())
        return float(np.abs(self.values).sum())

    @property
    def support(self):
        return self.values != 0

    def sign(self, x):
        v = self.values[qsim.setting_index(x, self.n)]
        if v == 0:
            raise ValueError(f"sign of g is undefined at x={x!r} where g = 0")
        return 1 if v > 0 else -1

    def signs(self):
        """Sign of g at every index, 0 where g vanishes."""
        return np.sign(self.values).astype(np.int64)

    def __neg__(self):
        return GTable(self.n, -self.values)

    def relabel(self, party):
        """Swap the two settings of one party (x_i -> 1 - x_i); party is 0-based."""
        t = self.values.reshape((2,) * self.n)
        return GTable(self.n, np.flip(t, axis=party).reshape(-1))


@dataclass(frozen=True)
class SignFunction:
    """Table of ``S(s) = +-1`` over ``s in {-1, 1}^n``, indexed by ``b_i = (s_i + 1)/2``."""

    n: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        qsim._check_n(self.n)
        t = np.asarray(self.table).reshape(-1)
        if t.shape != (2**self.n,):
            raise DimensionError(f"expected {2**self.n} sign entries for n={self.n}, got {t.size}")
        if not np.all((t == 1) | (t == -1)):
            raise ValueError("sign function entries must be +1 or -1")
        object.__setattr__(self, "table", qsim._frozen(t.astype(np.int64)))

    @classmethod
    def from_function(cls, n, fn):
        """Build from a callable taking the tuple ``(s_1, ..., s_n)``."""
        table = [fn(s) for s in s_tuples(n)]
        return cls(n, np.round(np.asarray(table, dtype=float)).astype(np.int64))

    @classmethod
    def from_mask(cls, n, mask):
        """Bit j of ``mask`` is ``(S + 1)/2`` at s-index j."""
        mask = int(mask)
        if mask < 0 or mask >= 1 << (2**n):
            raise ValueError(f"mask {mask:#x} does not fit in {2**n} bits")
        bits = (mask >> np.arange(2**n, dtype=np.int64)) & 1
        return cls(n, 2 * bits - 1)

    @property
    def mask(self):
        return int(sum(1 << j for j in np.flatnonzero(self.table == 1)))

    def hex(self):
        return f"{self.mask:#x}"


def s_tuples(n):
    """All ``s in {-1, 1}^n`` in s-index order."""
    return list(itertools.product((-1, 1), repeat=n))


@functools.lru_cache(maxsize=None)
def _power_kron(n):
    m = np.ones((1, 1), dtype=np.int64)
    for _ in range(n):
        m = np.kron(m, _POWER_MATRIX)
    m.setflags(write=False)
    return m


def wwzb_transform(coefficients):
    """``g(x) = sum_s c(s) prod_i s_i^{x_i}`` for an arbitrary coefficient table ``c``.

    Integer coefficients give an exact int64 result.
    """
    c = np.asarray(coefficients).reshape(-1)
    n = int(round(np.log2(c.size)))
    if 2**n != c.size:
        raise DimensionError(f"coefficient count {c.size} is not a power of two")
    ints = _as_integral(c.astype(float))
    c = ints if ints is not None else c.astype(float)
    if n <= 6:
        return GTable(n, _power_kron(n) @ c)
    t = c.reshape((2,) * n)
    for i in range(n):
        t = np.moveaxis(np.tensordot(_POWER_MATRIX, t, axes=([1], [i])), 0, i)
    return GTable(n, t.reshape(-1))


def wwzb_g(sign):
    """Weight table generated by a sign function; entries are integers with ``|g| <= 2**n``."""
    return wwzb_transform(sign.table)


def mermin_coefficients(n):
    """``sqrt(2) cos(pi/4 sum s)`` for odd n, ``cos(pi/4 sum s)`` for even n.

    For odd n these are +-1; for even n they take values in {-1, 0, 1}.
    """
    scale = np.sqrt(2) if n % 2 else 1.0
    vals = [scale * np.cos(np.pi / 4 * sum(s)) for s in s_tuples(n)]
    return np.round(vals).astype(np.int64)


def ardehali_sign(n):
    """``sqrt(2) cos(pi/4 + pi/4 sum s)`` for even n."""
    if n % 2:
        raise ValueError(f"the Ardehali-type function needs an even party count, got n={n}")
    return SignFunction.from_function(n, lambda s: np.sqrt(2) * np.cos(np.pi / 4 + np.pi / 4 * sum(s)))


def _closed_form(n, scale, phase):
    x_sum = qsim.all_setting_bits(n).sum(axis=1)
    vals = scale * np.cos(np.pi / 2 * x_sum + phase)
    ints = np.round(vals)
    if np.max(np.abs(vals - ints)) > 1e-9:
        raise AssertionError("closed-form weights are not integral")
    return GTable(n, ints + 0.0)


def mermin_g(n):
    """Mermin-type weights ``sqrt(2^(n+1)) cos(pi/2 |x|)`` (odd n) or ``sqrt(2^n) cos(pi/2 |x|)`` (even n)."""
    if n < 2:
        raise ValueError(f"mermin_g needs n >= 2, got {n}")
    scale = np.sqrt(2.0 ** (n + 1)) if n % 2 else np.sqrt(2.0**n)
    g = _closed_form(n, scale, 0.0)
    ref = wwzb_transform(mermin_coefficients(n))
    if not np.array_equal(g.values, ref.values):
        raise AssertionError("mermin_g closed form disagrees with its generating coefficients")
    return g


def ardehali_g(n):
    """Ardehali-type weights ``sqrt(2^(n+1)) cos(pi/2 |x| + pi/4)``, n even."""
    if n < 2 or n % 2:
        raise ValueError(f"ardehali_g needs an even n >= 2, got {n}")
    g = _closed_form(n, np.sqrt(2.0 ** (n + 1)), np.pi / 4)
    ref = wwzb_g(ardehali_sign(n))
    if not np.array_equal(g.values, ref.values):
        raise AssertionError("ardehali_g closed form disagrees with its sign function")
    return g


@dataclass(frozen=True)
class DeterministicStrategy:
    """Local responses ``a_i(x_i) in {-1, +1}``; ``table[i, x]`` is party i's answer to setting x."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table).astype(np.int64)
        if t.ndim != 2 or t.shape[1] != 2:
            raise ValueError(f"strategy table must have shape (n, 2), got {t.shape}")
        if not np.all((t == 1) | (t == -1)):
            raise ValueError("strategy entries must be +1 or -1")
        object.__setattr__(self, "table", qsim._frozen(t))

    @property
    def n(self):
        return self.table.shape[0]

    @classmethod
    def from_index(cls, index, n):
        """Strategy number ``index`` in the enumeration order (party 1 most significant, base 4)."""
        digits = [(index >> (2 * (n - 1 - i))) & 3 for i in range(n)]
        return cls(STRATEGY_OPTIONS[digits])

    @property
    def index(self):
        idx = 0
        for row in self.table:
            k = int(np.flatnonzero((STRATEGY_OPTIONS == row).all(axis=1))[0])
            idx = idx * 4 + k
        return idx

    def respond(self, x_bits):
        """Outcome vector for setting bits ``x_bits``."""
        return self.table[np.arange(self.n), np.asarray(x_bits)]

    def correlations(self):
        """``E(x) = prod_i a_i(x_i)`` for every setting index (int64)."""
        bits = qsim.all_setting_bits(self.n)
        return np.prod(self.table[np.arange(self.n), bits], axis=1)

    def flipped(self):
        """Same strategy with party 1's answers negated (global sign flip of the product)."""
        t = np.array(self.table)
        t[0] *= -1
        return DeterministicStrategy(t)

    def to_list(self):
        return self.table.tolist()


@dataclass(frozen=True)
class StrategyEnsemble:
    """Deterministic strategies mixed by shared randomness with the given weights."""

    strategies: tuple
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        strategies = tuple(self.strategies)
        if not strategies:
            raise ValueError("strategy ensemble is empty")
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != len(strategies):
            raise ValueError("one weight per strategy required")
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("ensemble weights must be non-negative with positive sum")
        if len({s.n for s in strategies}) != 1:
            raise DimensionError("all strategies in an ensemble need the same party count")
        object.__setattr__(self, "strategies", strategies)
        object.__setattr__(self, "weights", qsim._frozen(w / w.sum()))

    @classmethod
    def single(cls, strategy):
        return cls((strategy,), np.ones(1))

    @property
    def n(self):
        return self.strategies[0].n

    def correlations(self):
        return sum(w * s.correlations() for w, s in zip(self.weights, self.strategies))


@dataclass(frozen=True)
class BellInequality:
    g: GTable
    classical_bound: float

    @classmethod
    def from_g(cls, g, cap=LHV_CAP):
        bound, _ = lhv_bound(g, cap=cap)
        return cls(g, bound)


def strategy_values(g, cap=LHV_CAP):
    """Bell expression ``sum_x g(x) prod_i a_i(x_i)`` for all ``4**n`` strategies.

    Returns a flat array in strategy-index order; int64 when g is integral.
    """
    if g.n > cap:
        raise CapacityError(
            f"exhaustive LHV search limited to n <= {cap} (got n={g.n}); "
            "raise it with --lhv-cap"
        )
    ints = g.integral_values
    if ints is not None:
        t, opts = ints.reshape((2,) * g.n), STRATEGY_OPTIONS
    else:
        t, opts = g.values.reshape((2,) * g.n), STRATEGY_OPTIONS.astype(float)
    for i in range(g.n):
        t = np.moveaxis(np.tensordot(opts, t, axes=([1], [i])), 0, i)
    return t.reshape(-1)


def lhv_bound(g, cap=LHV_CAP):
    """Maximum of the Bell expression over deterministic local strategies.

    Returns ``(B, strategy)``; ties resolve to the lowest strategy index.  ``B``
    is an exact Python int for integral ``g``.
    """
    vals = strategy_values(g, cap=cap)
    k = int(np.argmax(vals))
    best = vals[k]
    bound = int(best) if vals.dtype.kind == "i" else float(best)
    return bound, DeterministicStrategy.from_index(k, g.n)


def _values(E, n):
    if isinstance(E, qsim.CorrelationTensor):
        if E.n != n:
            raise DimensionError(f"correlation tensor has n={E.n}, weights have n={n}")
        return E.values
    arr = np.asarray(E, dtype=float).reshape(-1)
    if arr.size != 2**n:
        raise DimensionError(f"expected {2**n} correlation values, got {arr.size}")
    return arr


def bell_lhs(g, E):
    """``sum_x g(x) E(x)``."""
    return float(np.dot(g.values, _values(E, g.n)))


def boundary_slack(bound, tol=1e-9):
    return tol * max(1.0, abs(float(bound)))


def violated(ineq, E, tol=1e-9):
    """``(is_violated, margin)`` with ``margin = lhs - B``.

    Violation is strict: margins within ``tol * max(1, |B|)`` of zero count as
    the boundary, which is not a violation.
    """
    margin = bell_lhs(ineq.g, E) - float(ineq.classical_bound)
    return margin > boundary_slack(ineq.classical_bound, tol), margin


@dataclass(frozen=True)
class OptimizationResult:
    settings: qsim.MeasurementSettings
    value: float
    converged: bool
    restarts: int


def _settings_value(T, g_t, V):
    n = g_t.ndim
    E = T
    for i in range(n):
        E = np.moveaxis(np.tensordot(V[i], E, axes=([1], [i])), 0, i)
    return float(np.sum(g_t * E))


@functools.lru_cache(maxsize=None)
def _gradient_subscripts(n, i):
    # g over setting letters, T over Pauli letters, one (setting, Pauli) factor per other party
    xs, js = "abcdefgh"[:n], "ijklmnop"[:n]
    others = ",".join(xs[l] + js[l] for l in range(n) if l != i)
    return f"{xs},{js}{',' if others else ''}{others}->{xs[i]}{js[i]}"


def _party_gradient(T, g_t, V, i):
    """``G[k, :]``: the Bell value is ``sum_k G[k] . V[i, k]`` with the other parties fixed."""
    n = g_t.ndim
    operands = [V[l] for l in range(n) if l != i]
    return np.einsum(_gradient_subscripts(n, i), g_t, T, *operands, optimize=n > 5)


def _ascend(T, g_t, V, tolerance, max_sweeps):
    n = g_t.ndim
    value = _settings_value(T, g_t, V)
    for _ in range(max_sweeps):
        prev = value
        for i in range(n):
            G = _party_gradient(T, g_t, V, i)
            norms = np.linalg.norm(G, axis=1)
            for k in range(2):
                if norms[k] > 0:
                    V[i, k] = G[k] / norms[k]
        # with every other party fixed the value is linear in the last update
        value = float(np.sum(G * V[n - 1]))
        if value - prev <= tolerance * max(1.0, abs(value)):
            return value, True
    return value, False


def optimize_settings(state, g, restarts=32, tolerance=1e-10, seed=0, max_sweeps=5000):
    """Maximize ``bell_lhs(g, correlation_tensor(state, settings))`` over all Bloch vectors.

    Coordinate ascent: with every other observable fixed the expression is
    linear in one party's Bloch vector, so the optimal update is the
    normalized gradient.  Best of ``restarts`` random starts is returned; the
    value is a lower bound on the quantum maximum for ``state``.
    """
    if state.n != g.n:
        raise DimensionError(f"state has n={state.n}, weights have n={g.n}")
    if g.n > OPTIMIZER_CAP:
        raise CapacityError(f"settings optimizer limited to n <= {OPTIMIZER_CAP}")
    rng = np.random.default_rng(seed)
    T = qsim.pauli_tensor(state)
    g_t = g.values.reshape((2,) * g.n)
    best = None
    for _ in range(restarts):
        V = rng.standard_normal((g.n, 2, 3))
        V /= np.linalg.norm(V, axis=2, keepdims=True)
        value, converged = _ascend(T, g_t, V, tolerance, max_sweeps)
        if best is None or value > best[0]:
            best = (value, V.copy(), converged)
    value, V, converged = best
    settings = qsim.MeasurementSettings.from_vectors(V)
    value = bell_lhs(g, qsim.correlation_tensor(state, settings))
    return OptimizationResult(settings, value, converged, restarts)


def factorable_masks(n):
    """Bitmasks of all sign functions of the form ``prod_i S_i(s_i)``."""
    masks = set()
    singles = list(itertools.product((-1, 1), repeat=2))
    for choice in itertools.product(singles, repeat=n):
        table = [np.prod([choice[i][(s[i] + 1) // 2] for i in range(n)]) for s in s_tuples(n)]
        masks.add(SignFunction(n, np.array(table)).mask)
    return masks


def is_factorable(sign):
    return sign.mask in factorable_masks(sign.n)


def enumerate_wwzb(n):
    """Yield ``(SignFunction, GTable, is_factorable)`` for all ``2**(2**n)`` sign functions, by mask."""
    if n > WWZB_ENUM_CAP:
        raise CapacityError(f"WWZB enumeration limited to n <= {WWZB_ENUM_CAP} (got n={n})")
    qsim._check_n(n)
    factorable = factorable_masks(n)
    for mask in range(1 << (2**n)):
        sign = SignFunction.from_mask(n, mask)
        yield sign, wwzb_g(sign), mask in factorable
