"""Communication-complexity problems built from Bell weight tables.

Each party i gets ``(x_i, y_i)``.  The ``x`` are drawn from
``Q(x) = |g(x)| / sum|g|`` and the ``y_i`` are fair, independent signs; the
target is ``f = (prod_i y_i) * sign(g(x))``.  Every party broadcasts one bit
``e_i = a_i y_i`` and all answer ``prod_i e_i``, so a round succeeds exactly
when ``prod_i a_i = sign(g(x))``.

For this protocol class the success probability is
``(1 + sum_x g(x) E(x) / sum|g|) / 2``, hence a protocol beats every
classical one exactly when its correlations violate ``sum g E <= B``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import qsim
from .errors import DimensionError
from .inequalities import (
    LHV_CAP,
    DeterministicStrategy,
    GTable,
    StrategyEnsemble,
    bell_lhs,
    boundary_slack,
    lhv_bound,
)


@dataclass(frozen=True)
class CCProblem:
    g: GTable
    distribution: np.ndarray = field(init=False, repr=False)
    signs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.abs(self.g.values)
        q = w / w.sum()
        q[self.g.values == 0] = 0.0
        object.__setattr__(self, "distribution", qsim._frozen(q))
        object.__setattr__(self, "signs", qsim._frozen(self.g.signs()))

    @property
    def n(self):
        return self.g.n

    @property
    def support(self):
        """Setting indices with nonzero probability."""
        return np.flatnonzero(self.distribution > 0)

    def target(self, x, y):
        """``f(x, y) = (prod y_i) * sign(g(x))``; only defined on the support."""
        return int(np.prod(y)) * self.g.sign(x)


def build_problem(g):
    return CCProblem(g)


def classical_max_success_exact(g, cap=LHV_CAP):
    """``(1 + B / sum|g|) / 2`` as a Fraction; requires integral weights."""
    if g.integral_values is None:
        raise ValueError("exact classical optimum needs integer weights")
    bound, _ = lhv_bound(g, cap=cap)
    return (1 + Fraction(bound, g.total_weight)) / 2


def classical_max_success(g, cap=LHV_CAP):
    """Best success probability of any classical protocol in the class."""
    if g.integral_values is not None:
        return float(classical_max_success_exact(g, cap=cap))
    bound, _ = lhv_bound(g, cap=cap)
    return 0.5 * (1.0 + bound / g.total_weight)


def quantum_success(g, E):
    """``(1 + sum g E / sum|g|) / 2`` for a correlation tensor E."""
    p = 0.5 * (1.0 + bell_lhs(g, E) / g.total_weight)
    if not -1e-12 <= p <= 1 + 1e-12:
        raise AssertionError(f"success probability {p} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def _success_indicator(problem, strategy):
    return (strategy.correlations() == problem.signs).astype(float)


def strategy_success(g, strategy):
    """Success probability of a deterministic strategy or an ensemble, summed input by input."""
    problem = g if isinstance(g, CCProblem) else build_problem(g)
    if isinstance(strategy, DeterministicStrategy):
        strategy = StrategyEnsemble.single(strategy)
    if strategy.n != problem.n:
        raise DimensionError(f"strategy has n={strategy.n}, problem has n={problem.n}")
    p_x = sum(w * _success_indicator(problem, s)
              for w, s in zip(strategy.weights, strategy.strategies))
    return float(problem.distribution @ p_x)


def success_by_setting(problem, state, settings, visibility=1.0):
    """``P_x(prod a_i = sign g(x))`` on every support point, from the outcome distributions.

    With probability ``1 - visibility`` the outcomes are fair coins, which
    succeed half the time.
    """
    parity = qsim.parity_signs(problem.n)
    out = np.zeros(2**problem.n)
    for x in problem.support:
        dist = qsim.outcome_distribution(state, settings, int(x))
        hit = dist.probabilities[parity == problem.signs[x]].sum()
        out[x] = visibility * hit + (1 - visibility) * 0.5
    return out


def quantum_success_from_outcomes(g, state, settings, visibility=1.0):
    """Success probability summed input by input over measured outcome distributions."""
    problem = g if isinstance(g, CCProblem) else build_problem(g)
    return float(problem.distribution @ success_by_setting(problem, state, settings, visibility))


@dataclass(frozen=True)
class SuccessReport:
    classical_max: float
    quantum: float
    advantage: bool
    bell_lhs: float
    bound: float

    def __post_init__(self):
        margin = self.bell_lhs - self.bound
        slack = boundary_slack(self.bound)
        if self.advantage != (margin > slack):
            raise AssertionError("advantage flag disagrees with Bell violation")
        if abs(margin) > slack and (self.quantum > self.classical_max) != (margin > 0):
            raise AssertionError("success gap and Bell margin have different signs")

    @property
    def margin(self):
        return self.bell_lhs - self.bound

    @property
    def success_gap(self):
        return self.quantum - self.classical_max

    def to_dict(self):
        return asdict(self)


def analyze(g, E, cap=LHV_CAP):
    """Classical optimum, quantum success and Bell violation for one correlation tensor."""
    bound, _ = lhv_bound(g, cap=cap)
    lhs = bell_lhs(g, E)
    return SuccessReport(
        classical_max=classical_max_success(g, cap=cap),
        quantum=quantum_success(g, E),
        advantage=lhs - bound > boundary_slack(bound),
        bell_lhs=lhs,
        bound=float(bound),
    )
