"""Spectral density w, its flipped twin, maximal-function error gauges, and
the geometric weights entering every kernel estimate.

w is read off the terminal transfer coefficients through the Weyl function
(coefficients are frozen once the support is exhausted), and cross-checked
against 1/|E(T, x)|^2 computed by the independent E-solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from .engine import e_line_scan, transfer_many
from .errors import DomainError, PoleError
from .potential import Potential

INNER_MARGIN_FRACTION = 0.25  # maximal-function queries keep X/4 away from edges


# ---------------------------------------------------------------------------
# Weyl function
# ---------------------------------------------------------------------------


def weyl_m(a: complex, b: complex) -> complex:
    """m = (1 - b/a) / (1 + b/a); Herglotz for genuine transfer data."""
    r = b / a
    denom = 1.0 + r
    if abs(denom) <= 1e-14:
        raise PoleError("a + b vanishes; Weyl function has a pole here")
    return (1.0 - r) / denom


# ---------------------------------------------------------------------------
# Hardy-Littlewood maximal function on a grid
# ---------------------------------------------------------------------------


def maximal_function(
    x_grid: np.ndarray,
    h: np.ndarray,
    s: float,
    radii: np.ndarray | None = None,
) -> float:
    """Centered maximal function of |h| at s on a geometric radius ladder.

    Intervals are clipped to the grid and averaged with the clipped measure.
    ``radii`` overrides the default ladder {grid_step * 2^k} (used by the
    exhaustive-radius test oracle).
    """
    x_grid = np.asarray(x_grid, dtype=float)
    h = np.abs(np.asarray(h, dtype=float))
    lo, hi = x_grid[0], x_grid[-1]
    span = hi - lo
    margin = INNER_MARGIN_FRACTION * span / 2.0
    if not (lo + margin <= s <= hi - margin):
        raise DomainError(
            f"s={s} outside the inner window [{lo + margin}, {hi - margin}]"
        )
    step = x_grid[1] - x_grid[0]
    if radii is None:
        n_lad = int(math.ceil(math.log2(span / step))) + 1
        radii = step * 2.0 ** np.arange(n_lad)
    cum = np.concatenate([[0.0], cumulative_trapezoid(h, x_grid)])
    best = 0.0
    for r in radii:
        a = max(s - r, lo)
        b = min(s + r, hi)
        if b - a <= 0:
            continue
        Ia = np.interp(a, x_grid, cum)
        Ib = np.interp(b, x_grid, cum)
        best = max(best, (Ib - Ia) / (b - a))
    return float(best)


# ---------------------------------------------------------------------------
# spectral profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralProfile:
    x_grid: np.ndarray
    w: np.ndarray
    w_tilde: np.ndarray
    eps: np.ndarray          # NaN outside the inner window
    eps_tilde: np.ndarray
    mu: np.ndarray
    f_l1: float
    f_l2: float
    cross_check_sup: float   # sup |w * |E(T,x)|^2 - 1|
    potential: Potential = field(repr=False, compare=False)

    @property
    def grid_step(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def inner_window(self) -> tuple[float, float]:
        lo, hi = float(self.x_grid[0]), float(self.x_grid[-1])
        margin = INNER_MARGIN_FRACTION * (hi - lo) / 2.0
        return lo + margin, hi - margin

    def w_exact_at(self, s: float, steps: int | None = None) -> float:
        """w(s) from a dedicated transfer solve (no grid interpolation)."""
        a, b = transfer_many(
            self.potential, np.array([s]), np.array([self.potential.support_end]),
            steps=steps,
        )
        return float(weyl_m(complex(a[0, 0]), complex(b[0, 0])).real)

    def eps_at(self, s: float) -> float:
        return maximal_function(self.x_grid, self.w - 1.0, s)

    def eps_tilde_at(self, s: float) -> float:
        return maximal_function(self.x_grid, self.w_tilde - 1.0, s)

    def mu_at(self, s: float) -> float:
        return self.eps_at(s) + self.eps_tilde_at(s)


def build_profile(
    f: Potential,
    X: float = 16.0,
    n_points: int = 1025,
    steps: int | None = None,
    multiplier: float = 1.0,
) -> SpectralProfile:
    """Spectral densities on [-X, X] from the terminal transfer coefficients.

    w = Re m with m the Weyl function; the flipped density uses b -> -b (the
    transform is odd in the potential).  Cross-checks w |E(T, x)|^2 = 1.
    """
    if n_points < 8:
        raise DomainError("n_points must be at least 8")
    x_grid = np.linspace(-X, X, n_points)
    T = f.support_end
    a, b = transfer_many(f, x_grid, np.array([T]), steps=steps, multiplier=multiplier)
    a, b = a[-1], b[-1]
    r = b / a
    w = ((1.0 - r) / (1.0 + r)).real
    w_tilde = ((1.0 + r) / (1.0 - r)).real

    Y, ls = e_line_scan(f, x_grid.astype(complex), T, order=0, steps=steps,
                        multiplier=multiplier)
    absE2 = np.abs(Y[0]) ** 2 * np.exp(2.0 * ls)
    cross = float(np.max(np.abs(w * absE2 - 1.0)))

    eps = np.full(n_points, np.nan)
    eps_t = np.full(n_points, np.nan)
    lo, hi = x_grid[0], x_grid[-1]
    margin = INNER_MARGIN_FRACTION * (hi - lo) / 2.0
    inner = (x_grid >= lo + margin) & (x_grid <= hi - margin)
    step = x_grid[1] - x_grid[0]
    n_lad = int(math.ceil(math.log2((hi - lo) / step))) + 1
    radii = step * 2.0 ** np.arange(n_lad)
    for name, arr, target in (("w", w, eps), ("wt", w_tilde, eps_t)):
        habs = np.abs(arr - 1.0)
        cum = np.concatenate([[0.0], cumulative_trapezoid(habs, x_grid)])
        best = np.zeros(n_points)
        for rr in radii:
            aa = np.clip(x_grid - rr, lo, hi)
            bb = np.clip(x_grid + rr, lo, hi)
            avg = (np.interp(bb, x_grid, cum) - np.interp(aa, x_grid, cum)) / (bb - aa)
            best = np.maximum(best, avg)
        target[inner] = best[inner]

    return SpectralProfile(
        x_grid=x_grid, w=w, w_tilde=w_tilde,
        eps=eps, eps_tilde=eps_t, mu=eps + eps_t,
        f_l1=f.l1, f_l2=f.l2, cross_check_sup=cross,
        potential=f,
    )


def eps_mu(profile: SpectralProfile, s: float) -> tuple[float, float, float]:
    """(eps(s), eps_tilde(s), mu(s)) by direct maximal-function evaluation."""
    e = profile.eps_at(s)
    et = profile.eps_tilde_at(s)
    return e, et, e + et


# ---------------------------------------------------------------------------
# geometric weights
# ---------------------------------------------------------------------------


def sinc_diagonal(t: float, lam: complex) -> float:
    """sinc(t, lam, lam) = sinh(2 t |Im lam|) / (2 pi |Im lam|), continuous at 0."""
    y = abs(lam.imag)
    a = 2.0 * t * y
    if a < 1e-4:
        return (t / math.pi) * (1.0 + a * a / 6.0 + a**4 / 120.0)
    return math.sinh(a) / (2.0 * math.pi * y)


def geom_weights(s: float, t: float, lam: complex) -> tuple[float, float]:
    """The dimensionless position weights (X, V) of lam relative to (s, t)."""
    if t <= 0:
        raise DomainError("t must be positive")
    X = max(1.0, t * abs(lam.real - s) / (t * abs(lam.imag) + 1.0))
    return X, X * sinc_diagonal(t, lam)


# ---------------------------------------------------------------------------
# Plancherel and related diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlancherelResult:
    lhs: float
    rhs: float
    rel_err: float
    windows: np.ndarray
    integrals: np.ndarray
    increments: np.ndarray
    tail_estimate: float


def plancherel_residual(
    f: Potential,
    X: float = 16.0,
    points_per_unit: int = 32,
    max_doublings: int = 3,
    steps: int | None = None,
) -> PlancherelResult:
    """Check int log|a(T, x)| dx = (pi/2) ||f||_2^2 with window doubling.

    The integral is evaluated on nested windows X, 2X, ..., and the final
    doubling increment is reported as the tail estimate and added to the lhs.
    """
    rhs = (math.pi / 2.0) * f.l2**2
    X_max = X * 2**max_doublings
    n = 2 * int(round(X_max * points_per_unit)) + 1
    x_grid = np.linspace(-X_max, X_max, n)
    a, _ = transfer_many(f, x_grid, np.array([f.support_end]), steps=steps)
    log_a = np.log(np.abs(a[-1]))
    mid = n // 2
    windows = X * 2.0 ** np.arange(max_doublings + 1)
    integrals = []
    for Xk in windows:
        k = int(round(Xk * points_per_unit))
        seg = log_a[mid - k: mid + k + 1]
        integrals.append(float(simpson(seg, dx=1.0 / points_per_unit)))
    integrals = np.array(integrals)
    increments = np.diff(integrals)
    tail = float(increments[-1]) if increments.size else 0.0
    lhs = float(integrals[-1] + tail)
    rel = abs(lhs - rhs) / rhs if rhs > 0 else (0.0 if abs(lhs) < 1e-15 else math.inf)
    return PlancherelResult(
        lhs=lhs, rhs=rhs, rel_err=float(rel),
        windows=windows, integrals=integrals, increments=increments,
        tail_estimate=tail,
    )


@dataclass(frozen=True)
class MaximalLogAProfile:
    x_grid: np.ndarray
    t_grid: np.ndarray
    profile: np.ndarray      # per-x sup over t of sqrt(log |a(t, x)|)
    f_l2_sq: float

    def distribution(self, lambdas: np.ndarray) -> np.ndarray:
        """Grid measure of {x : profile(x) > lambda} for each lambda."""
        dx = self.x_grid[1] - self.x_grid[0]
        return np.array([float(np.sum(self.profile > lam) * dx) for lam in lambdas])


def maximal_log_a_profile(
    f: Potential, x_grid: np.ndarray, t_grid: np.ndarray, steps: int | None = None
) -> MaximalLogAProfile:
    """The nonlinear maximal diagnostic sup_t sqrt(log |a(t, x)|) on a grid."""
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    a, _ = transfer_many(f, x_grid, t_grid, steps=steps)
    log_a = np.log(np.maximum(np.abs(a), 1.0))
    return MaximalLogAProfile(
        x_grid=x_grid, t_grid=t_grid,
        profile=np.sqrt(np.max(log_a, axis=0)),
        f_l2_sq=f.l2**2,
    )


@dataclass(frozen=True)
class HausdorffYoungResult:
    p: float
    p_prime: float
    ratio: float
    lhs: float
    rhs: float
    defined: bool


def hausdorff_young_diagnostic(
    f: Potential,
    p: float,
    X: float = 32.0,
    points_per_unit: int = 32,
    steps: int | None = None,
) -> HausdorffYoungResult:
    """Empirical ratio ||sqrt(log|a|)||_{p'} / ||f||_p (diagnostic, no pass/fail)."""
    if not (1.0 <= p <= 2.0):
        raise DomainError("p must lie in [1, 2]")
    rhs = f.norm(p)
    n = 2 * int(round(X * points_per_unit)) + 1
    x_grid = np.linspace(-X, X, n)
    a, _ = transfer_many(f, x_grid, np.array([f.support_end]), steps=steps)
    g = np.sqrt(np.log(np.maximum(np.abs(a[-1]), 1.0)))
    if p == 1.0:
        lhs = float(np.max(g))
    else:
        pp = p / (p - 1.0)
        lhs = float(simpson(g**pp, dx=1.0 / points_per_unit) ** (1.0 / pp))
    if rhs == 0.0:
        return HausdorffYoungResult(p=p, p_prime=math.inf if p == 1 else p / (p - 1),
                                    ratio=math.nan, lhs=lhs, rhs=rhs, defined=False)
    return HausdorffYoungResult(
        p=p, p_prime=math.inf if p == 1 else p / (p - 1),
        ratio=lhs / rhs, lhs=lhs, rhs=rhs, defined=True,
    )
