"""Continuous-settings variant: inputs ``x_i in [0, 2pi)`` with kernel ``cos(x_1 + ... + x_n)``.

Party i measures the equatorial observable at angle ``x_i``.  The Bell
expression ``int cos(sum x) E(x) dx`` is integrated on a uniform periodic
tensor grid (trapezoidal rule, spectrally accurate for trigonometric
integrands).  The normalization ``int |cos(sum x)| dx`` has kinks, so it is
reduced to the single sum variable and integrated piecewise by Gauss-Legendre.
The local-realistic bound ``4**n`` is taken as given.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import qsim
from .errors import CapacityError

GRID_CAP = 4
_GL_NODES = 48


def classical_bound(n):
    return 4.0**n


@dataclass(frozen=True)
class ContinuumScenario:
    n: int
    m: int = 64
    state: qsim.PureState | None = field(default=None, repr=False)
    visibility: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.n > GRID_CAP:
            raise CapacityError(f"continuum grid limited to 1 <= n <= {GRID_CAP} (got n={self.n})")
        if self.m < 8 or self.m % 2:
            raise ValueError(f"grid size m must be even and >= 8, got {self.m}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility {self.visibility} outside [0, 1]")
        if self.state is None:
            object.__setattr__(self, "state", qsim.ghz(self.n))
        elif self.state.n != self.n:
            raise ValueError(f"state has n={self.state.n}, scenario has n={self.n}")

    @property
    def is_ghz(self):
        return np.allclose(self.state.amplitudes, qsim.ghz(self.n).amplitudes, atol=1e-15, rtol=0)


def _grid_index_sum(n, m):
    """``(k_1 + ... + k_n) mod m`` on the full ``m**n`` grid."""
    k = np.arange(m)
    total = np.zeros((1,) * n, dtype=np.int64)
    for i in range(n):
        shape = [1] * n
        shape[i] = m
        total = total + k.reshape(shape)
    return total % m


def ghz_correlation(angles):
    """Closed form ``E = cos(sum x_i)`` for GHZ with equatorial observables."""
    return np.cos(np.sum(angles, axis=-1))


def check_ghz_closed_form(n, samples=8, seed=0, tol=1e-10):
    """Compare the GHZ closed form against the state-vector simulator at random angles."""
    rng = np.random.default_rng(seed)
    state = qsim.ghz(n)
    for _ in range(samples):
        angles = rng.uniform(0, 2 * np.pi, n)
        settings = qsim.equatorial_settings(angles, angles)
        sim = qsim.correlation(state, settings, 0)
        if abs(sim - ghz_correlation(angles)) > tol:
            raise AssertionError(f"GHZ closed form off by {abs(sim - ghz_correlation(angles))}")
    return True


def correlation_grid(scn):
    """``E`` at every grid point (shape ``(m,)*n``), visibility included.

    General path: contract the X/Y block of the Pauli correlation tensor with
    ``(cos x_i, sin x_i)`` along each axis.
    """
    theta = 2 * np.pi * np.arange(scn.m) / scn.m
    basis = np.stack([np.cos(theta), np.sin(theta)])
    E = qsim.pauli_tensor(scn.state, axes=(0, 1))
    for i in range(scn.n):
        E = np.moveaxis(np.tensordot(basis, E, axes=([0], [i])), 0, i)
    return scn.visibility * E


def functional_lhs(scn, fast=True):
    """Trapezoidal estimate of ``int_{[0,2pi)^n} cos(sum x) E(x) dx``."""
    cell = (2 * np.pi / scn.m) ** scn.n
    idx = _grid_index_sum(scn.n, scn.m)
    kernel = np.cos(2 * np.pi * idx / scn.m)
    if fast and scn.is_ghz:
        check_ghz_closed_form(scn.n)
        E = scn.visibility * kernel
    else:
        E = correlation_grid(scn)
    return float(cell * np.sum(kernel * E))


def _gauss_legendre(f, a, b, nodes=_GL_NODES):
    t, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (b - a) * t + 0.5 * (b + a)
    return 0.5 * (b - a) * float(np.dot(w, f(u)))


def kernel_weight(n):
    """``W = int_{[0,2pi)^n} |cos(sum x)| dx``.

    The integrand depends only on ``u = sum x mod 2pi``, which is uniform on
    the torus, so ``W = (2pi)^(n-1) int_0^{2pi} |cos u| du``; the 1-d integral
    is split at the kinks of ``|cos|``.
    """
    breaks = [0.0, np.pi / 2, 3 * np.pi / 2, 2 * np.pi]
    one_d = sum(_gauss_legendre(lambda u: np.abs(np.cos(u)), a, b) for a, b in zip(breaks, breaks[1:]))
    return (2 * np.pi) ** (n - 1) * one_d


def kernel_weight_grid(n, m):
    """Tensor-grid trapezoidal estimate of W (only O(m^-2) accurate because of the kinks)."""
    idx = _grid_index_sum(n, m)
    return float((2 * np.pi / m) ** n * np.sum(np.abs(np.cos(2 * np.pi * idx / m))))


@dataclass(frozen=True)
class ContinuumReport:
    n: int
    m: int
    lhs: float
    bound: float
    W: float
    classical_max: float
    quantum: float
    advantage: bool

    def to_dict(self):
        return asdict(self)


def continuum_success(scn):
    """Classical optimum and quantum success probability for a scenario."""
    lhs = functional_lhs(scn)
    W = kernel_weight(scn.n)
    bound = classical_bound(scn.n)
    return ContinuumReport(
        n=scn.n,
        m=scn.m,
        lhs=lhs,
        bound=bound,
        W=W,
        classical_max=0.5 * (1 + bound / W),
        quantum=0.5 * (1 + lhs / W),
        advantage=lhs - bound > 1e-9 * bound,
    )
