"""Round-by-round simulation of the one-bit-broadcast protocols.

Seeding: rounds are split into fixed blocks of ``BLOCK_SIZE``; block ``b``
draws from ``SeedSequence(seed, spawn_key=(b,))``.  The tally therefore does
not depend on how blocks are scheduled.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import qsim
from .ccp import CCProblem, build_problem, quantum_success, strategy_success
from .errors import DimensionError
from .inequalities import DeterministicStrategy, StrategyEnsemble

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class RoundTrace:
    x: tuple
    y: tuple
    a: tuple
    broadcasts: tuple
    guess: int
    target: int
    success: bool

    def __post_init__(self):
        if len(self.broadcasts) != len(self.y):
            raise AssertionError("one broadcast bit per party")
        if any(e != ai * yi for e, ai, yi in zip(self.broadcasts, self.a, self.y)):
            raise AssertionError("broadcast must equal a_i * y_i")
        if self.success != (self.guess == self.target):
            raise AssertionError("success flag inconsistent with guess and target")

    def to_json(self):
        return json.dumps(asdict(self), separators=(",", ":"))


@dataclass(frozen=True)
class SimReport:
    rounds: int
    successes: int
    empirical_rate: float
    analytic_rate: float
    standard_error: float
    z_score: float

    def to_dict(self):
        return asdict(self)


def _report(rounds, successes, analytic):
    empirical = successes / rounds
    se = math.sqrt(max(analytic * (1 - analytic), 0.0) / rounds)
    if se > 0:
        z = (empirical - analytic) / se
    elif abs(empirical - analytic) < 1e-12:
        z = 0.0
    else:
        z = math.copysign(math.inf, empirical - analytic)
    return SimReport(rounds, successes, empirical, analytic, se, z)


def _block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _blocks(rounds):
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    for b, start in enumerate(range(0, rounds, BLOCK_SIZE)):
        yield b, min(BLOCK_SIZE, rounds - start)


def _inverse_cdf(cdf, u):
    idx = np.searchsorted(cdf, u * cdf[-1], side="right")
    return np.minimum(idx, cdf.size - 1)


def _signs(rng, shape):
    return 1 - 2 * rng.integers(0, 2, size=shape, dtype=np.int64)


def sample_inputs(problem, rng):
    """One draw of ``(x, y)``: x from Q by inverse CDF, each ``y_i`` a fair sign."""
    x = int(_inverse_cdf(np.cumsum(problem.distribution), rng.random()))
    return x, _signs(rng, problem.n)


def sample_input_batch(problem, rng, size):
    cdf = np.cumsum(problem.distribution)
    x = _inverse_cdf(cdf, rng.random(size))
    return x, _signs(rng, (size, problem.n))


def collective_guess(broadcasts):
    """Each party's guess of f, computed from the n broadcast bits alone.

    Returns an array of shape ``(rounds, n)``; column i is party i's guess.
    """
    b = np.atleast_2d(broadcasts)
    per_party = np.prod(b, axis=1, keepdims=True)
    return np.repeat(per_party, b.shape[1], axis=1)


def _score(problem, x, y, a, trace):
    e = a * y
    guesses = collective_guess(e)
    if not np.all(guesses == guesses[:, :1]):
        raise AssertionError("parties disagree on the guess")
    guess = guesses[:, 0]
    target = np.prod(y, axis=1) * problem.signs[x]
    success = guess == target
    if trace is not None:
        bits = qsim.all_setting_bits(problem.n)
        for k in range(len(x)):
            rt = RoundTrace(
                x=tuple(int(v) for v in bits[x[k]]),
                y=tuple(int(v) for v in y[k]),
                a=tuple(int(v) for v in a[k]),
                broadcasts=tuple(int(v) for v in e[k]),
                guess=int(guess[k]),
                target=int(target[k]),
                success=bool(success[k]),
            )
            trace.write(rt.to_json() + "\n")
    return int(success.sum())


def _as_problem(problem):
    return problem if isinstance(problem, CCProblem) else build_problem(problem)


def run_classical(problem, ensemble, rounds, seed, trace=None):
    """Simulate a classical protocol where ``a_i`` depends only on ``(x_i, lambda)``.

    ``lambda`` indexes a member of ``ensemble`` and is drawn before the inputs
    in every round.  ``trace``, if given, receives one JSON line per round.
    """
    problem = _as_problem(problem)
    if isinstance(ensemble, DeterministicStrategy):
        ensemble = StrategyEnsemble.single(ensemble)
    if ensemble.n != problem.n:
        raise DimensionError(f"strategies have n={ensemble.n}, problem has n={problem.n}")
    tables = np.stack([s.table for s in ensemble.strategies])
    lam_cdf = np.cumsum(ensemble.weights)
    bits = qsim.all_setting_bits(problem.n)
    parties = np.arange(problem.n)
    successes = 0
    for b, size in _blocks(rounds):
        rng = _block_rng(seed, b)
        lam = _inverse_cdf(lam_cdf, rng.random(size))
        x, y = sample_input_batch(problem, rng, size)
        a = tables[lam[:, None], parties[None, :], bits[x]]
        successes += _score(problem, x, y, a, trace)
    return _report(rounds, successes, strategy_success(problem, ensemble))


def run_quantum(problem, state, settings, visibility, rounds, seed, trace=None):
    """Simulate the measurement protocol with white noise of weight ``1 - visibility``.

    Each round draws inputs, then with probability ``visibility`` samples the
    outcomes from the state's distribution for the drawn settings and
    otherwise gives every party an independent fair coin.
    """
    problem = _as_problem(problem)
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility {visibility} outside [0, 1]")
    if state.n != problem.n or settings.n != problem.n:
        raise DimensionError("state, settings and problem must have the same n")
    n = problem.n
    cdfs = np.ones((2**n, 2**n))
    for x in problem.support:
        cdfs[x] = np.cumsum(qsim.outcome_distribution(state, settings, int(x)).probabilities)
    outcome_signs = 1 - 2 * qsim.all_setting_bits(n)
    successes = 0
    for b, size in _blocks(rounds):
        rng = _block_rng(seed, b)
        x, y = sample_input_batch(problem, rng, size)
        clean = rng.random(size) < visibility
        rows = cdfs[x]
        k = (rows <= rng.random(size)[:, None] * rows[:, -1:]).sum(axis=1)
        k = np.minimum(k, 2**n - 1)
        coins = _signs(rng, (size, n))
        a = np.where(clean[:, None], outcome_signs[k], coins)
        successes += _score(problem, x, y, a, trace)
    E = qsim.correlation_tensor(state, settings, visibility)
    return _report(rounds, successes, quantum_success(problem.g, E))
