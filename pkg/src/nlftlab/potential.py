"""Compactly supported complex potentials on [0, T] and their interval machinery.

A potential is stored as uniform samples on [0, T]; closed-form fixtures keep
their generating callable attached so that downstream ODE solvers can evaluate
between grid nodes without losing accuracy.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .errors import DomainError

SIGMA_DEFAULT = 1e-5          # fixed smallness parameter for sigma-intervals
SECTOR_COUNT = 16
SECTOR_WIDTH = math.pi / 8.0  # arg-sectors used by the dominant-phase search


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights on n uniform nodes; trapezoid tail cell if n is even.

    Shared by the partial Fourier integral and the Fejer-mean machinery so the
    discrete Fubini swap there is an exact reordering of one double sum.
    """
    if n < 2:
        raise DomainError("need at least 2 nodes")
    w = np.zeros(n)
    if n == 2:
        w[:] = h / 2.0
        return w
    m = n if n % 2 == 1 else n - 1
    w[0:m:2] += 2.0
    w[1:m:2] += 4.0
    w[0] -= 1.0
    w[m - 1] -= 1.0
    w *= h / 3.0
    if n % 2 == 0:
        w[-2] += h / 2.0
        w[-1] += h / 2.0
    return w


@dataclass(frozen=True)
class Potential:
    """Complex-valued function supported in [0, support_end], uniformly sampled.

    ``profile`` (optional) is the exact generating callable; when present it is
    used for off-grid evaluation, otherwise a cubic spline through the samples
    is used.
    """

    support_end: float
    samples: np.ndarray
    closed_form_tag: str | None = None
    meta: dict = field(default_factory=dict)
    profile: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        if not (self.support_end > 0):
            raise DomainError(f"support_end must be positive, got {self.support_end}")
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size < 3:
            raise DomainError("samples must be a 1-d array with at least 3 entries")
        if not np.all(np.isfinite(samples)):
            raise DomainError("samples contain non-finite values")
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_spline", None)

    # -- basic geometry -----------------------------------------------------

    @property
    def n_samples(self) -> int:
        return self.samples.size

    @property
    def grid_step(self) -> float:
        return self.support_end / (self.n_samples - 1)

    @property
    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.support_end, self.n_samples)

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.samples == 0))

    # -- evaluation ----------------------------------------------------------

    def value(self, t) -> np.ndarray:
        """Evaluate f(t); zero outside [0, support_end]."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros(t.shape, dtype=complex)
        inside = (t >= 0.0) & (t <= self.support_end)
        if np.any(inside):
            if self.profile is not None:
                out[inside] = np.asarray(self.profile(t[inside]), dtype=complex)
            elif self.is_zero:
                pass
            else:
                if object.__getattribute__(self, "_spline") is None:
                    object.__setattr__(
                        self, "_spline", CubicSpline(self.time_grid, self.samples)
                    )
                out[inside] = object.__getattribute__(self, "_spline")(t[inside])
        return out[0] if scalar else out

    # -- norms ----------------------------------------------------------------

    def norm(self, p: float = 1) -> float:
        """L^p norm by composite Simpson quadrature on the sample grid."""
        if p < 1:
            raise DomainError(f"norm order must satisfy p >= 1, got {p}")
        absf = np.abs(self.samples)
        if p == 1:
            val = simpson(absf, dx=self.grid_step)
        else:
            val = simpson(absf**p, dx=self.grid_step) ** (1.0 / p)
        return float(val)

    @property
    def l1(self) -> float:
        return self.norm(1)

    @property
    def l2(self) -> float:
        return self.norm(2)

    # -- transformations -------------------------------------------------------

    def scale(self, lam: float) -> "Potential":
        """Scaling symmetry t -> lam * f(lam * t); support shrinks to T / lam."""
        if not (lam > 0):
            raise DomainError(f"scaling parameter must be positive, got {lam}")
        if lam == 1.0:
            return self
        new_T = self.support_end / lam
        grid = np.linspace(0.0, new_T, self.n_samples)
        new_samples = lam * self.value(lam * grid)
        new_profile = None
        if self.profile is not None:
            old = self.profile
            new_profile = lambda t, _old=old, _lam=lam: _lam * np.asarray(_old(_lam * np.asarray(t)))
        return Potential(
            support_end=new_T,
            samples=new_samples,
            closed_form_tag=self.closed_form_tag,
            meta={**self.meta, "scaled_by": lam},
            profile=new_profile,
        )

    def rescale_amplitude(self, c: complex) -> "Potential":
        new_profile = None
        if self.profile is not None:
            old = self.profile
            new_profile = lambda t, _old=old, _c=c: _c * np.asarray(_old(np.asarray(t)))
        return Potential(
            support_end=self.support_end,
            samples=c * self.samples,
            closed_form_tag=self.closed_form_tag,
            meta=dict(self.meta),
            profile=new_profile,
        )

    def partial_fourier(self, xi: float, s: float) -> complex:
        """Partial Fourier integral int_0^xi f(y) exp(-i y s) dy.

        Composite Simpson on the whole sample cells inside [0, xi] plus a
        3-point Simpson panel for the fractional last cell.
        """
        if xi < -1e-15 or xi > self.support_end + 1e-12:
            raise DomainError(f"xi={xi} outside [0, {self.support_end}]")
        xi = min(max(xi, 0.0), self.support_end)
        if xi == 0.0:
            return 0.0 + 0.0j
        h = self.grid_step
        k = int(math.floor(xi / h + 1e-12))
        k = min(k, self.n_samples - 1)
        grid = self.time_grid
        val = 0.0 + 0.0j
        if k >= 1:
            w = simpson_weights(k + 1, h)
            y = grid[: k + 1]
            val += complex(np.sum(w * self.samples[: k + 1] * np.exp(-1j * y * s)))
        tail = xi - grid[k]
        if tail > 1e-14:
            y = np.array([grid[k], grid[k] + tail / 2.0, grid[k] + tail])
            fy = self.value(y) * np.exp(-1j * y * s)
            val += (tail / 6.0) * (fy[0] + 4.0 * fy[1] + fy[2])
        return complex(val)

    # -- serialization -----------------------------------------------------------

    def descriptor(self) -> dict:
        return {
            "kind": self.closed_form_tag or "custom",
            "T": self.support_end,
            "n_samples": self.n_samples,
            "target_l1": self.meta.get("target_l1"),
            "seed": self.meta.get("seed"),
        }

    def save_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "re_f", "im_f"])
            for t, v in zip(self.time_grid, self.samples):
                writer.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])


def load_csv(path) -> Potential:
    """Reload a potential saved by ``Potential.save_csv`` (bit-identical samples)."""
    ts, vals = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "re_f", "im_f"]:
            raise DomainError(f"unexpected CSV header {header}")
        for row in reader:
            ts.append(float(row[0]))
            vals.append(complex(float(row[1]), float(row[2])))
    return Potential(support_end=ts[-1], samples=np.array(vals), closed_form_tag="custom")


# -- fixture constructors --------------------------------------------------------


def zero_potential(T: float = 1.0, n_samples: int = 513) -> Potential:
    return Potential(
        support_end=T,
        samples=np.zeros(n_samples, dtype=complex),
        closed_form_tag="box",
        meta={"kind": "zero"},
        profile=lambda t: np.zeros(np.shape(t), dtype=complex),
    )


def box(T: float = 1.0, amplitude: complex = 1.0, n_samples: int = 513) -> Potential:
    amp = complex(amplitude)
    return Potential(
        support_end=T,
        samples=np.full(n_samples, amp, dtype=complex),
        closed_form_tag="box",
        meta={"kind": "box"},
        profile=lambda t, _a=amp: np.full(np.shape(t), _a, dtype=complex),
    )


def truncated_gaussian(
    T: float = 1.0, amplitude: complex = 1.0, width: float | None = None, n_samples: int = 513
) -> Potential:
    width = width if width is not None else T / 5.0
    amp = complex(amplitude)

    def prof(t, _a=amp, _c=T / 2.0, _w=width):
        t = np.asarray(t, dtype=float)
        return _a * np.exp(-((t - _c) ** 2) / (2.0 * _w**2))

    grid = np.linspace(0.0, T, n_samples)
    return Potential(
        support_end=T,
        samples=prof(grid),
        closed_form_tag="truncated_gaussian",
        meta={"kind": "truncated_gaussian", "width": width},
        profile=prof,
    )


def chirp(
    T: float = 1.0, amplitude: complex = 1.0, cycles: float = 3.0, n_samples: int = 513
) -> Potential:
    """Gaussian-envelope quadratic chirp; phases sweep several turns over [0, T]."""
    amp = complex(amplitude)
    width = T / 5.0

    def prof(t, _a=amp, _c=T / 2.0, _w=width, _k=cycles, _T=T):
        t = np.asarray(t, dtype=float)
        env = np.exp(-((t - _c) ** 2) / (2.0 * _w**2))
        return _a * env * np.exp(2j * math.pi * _k * (t / _T) ** 2)

    grid = np.linspace(0.0, T, n_samples)
    return Potential(
        support_end=T,
        samples=prof(grid),
        closed_form_tag="chirp",
        meta={"kind": "chirp", "cycles": cycles},
        profile=prof,
    )


def random_bandlimited(
    T: float = 1.0, seed: int = 7, modes: int = 6, n_samples: int = 513
) -> Potential:
    """Seeded finite Fourier sum; smooth, complex, deterministic per seed."""
    rng = np.random.default_rng(seed)
    coef = (rng.standard_normal(modes + 1) + 1j * rng.standard_normal(modes + 1))
    coef = coef / (1.0 + np.arange(modes + 1)) ** 1.5

    def prof(t, _c=coef, _T=T):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for k, ck in enumerate(_c):
            out = out + ck * np.exp(2j * math.pi * k * t / _T)
        return out

    grid = np.linspace(0.0, T, n_samples)
    return Potential(
        support_end=T,
        samples=prof(grid),
        closed_form_tag="random_bandlimited",
        meta={"kind": "random_bandlimited", "seed": seed, "modes": modes},
        profile=prof,
    )


_KIND_BUILDERS = {
    "box": lambda T, n, seed: box(T, 1.0, n),
    "truncated_gaussian": lambda T, n, seed: truncated_gaussian(T, 1.0, None, n),
    "chirp": lambda T, n, seed: chirp(T, 1.0, 3.0, n),
    "random_bandlimited": lambda T, n, seed: random_bandlimited(T, seed, 6, n),
    "zero": lambda T, n, seed: zero_potential(T, n),
}


def make_potential(
    kind: str, target_l1: float | None, T: float = 1.0, n_samples: int = 513, seed: int = 7
) -> Potential:
    """Build a named fixture, amplitude-rescaled so the grid L1 norm hits target_l1."""
    if kind not in _KIND_BUILDERS:
        raise DomainError(f"unknown potential kind {kind!r}")
    f = _KIND_BUILDERS[kind](T, n_samples, seed)
    if target_l1 is not None and kind != "zero":
        if not (target_l1 > 0):
            raise DomainError("target_l1 must be positive")
        f = f.rescale_amplitude(target_l1 / f.l1)
        f.meta["target_l1"] = target_l1
    f.meta["seed"] = seed
    return f


def standard_potentials(
    target_l1: float, T: float = 1.0, n_samples: int = 513, seed: int = 7
) -> list[Potential]:
    """The four standard fixtures (box, gaussian, chirp, random), at a common L1 norm."""
    return [
        make_potential(kind, target_l1, T, n_samples, seed)
        for kind in ("box", "truncated_gaussian", "chirp", "random_bandlimited")
    ]


# -- interval machinery ------------------------------------------------------------


@dataclass(frozen=True)
class SigmaInterval:
    lo: float
    hi: float
    sigma: float
    dominant_phase: float | None = None

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise DomainError(f"degenerate interval [{self.lo}, {self.hi}]")
        if not (0.0 < self.sigma < 1.0):
            raise DomainError(f"sigma must lie in (0,1), got {self.sigma}")


def _clipped_trapezoid_weights(f: Potential, lo: float, hi: float) -> np.ndarray:
    """Trapezoid weights for int over [lo, hi] as a linear functional on the samples.

    Fractional boundary cells distribute their trapezoid weight onto the two
    flanking nodes by linear interpolation, so that masked sums computed with
    these weights are internally consistent across all interval operations.
    """
    if hi <= lo:
        raise DomainError(f"degenerate interval [{lo}, {hi}]")
    lo = max(lo, 0.0)
    hi = min(hi, f.support_end)
    h = f.grid_step
    n = f.n_samples
    w = np.zeros(n)
    i0 = int(math.ceil(lo / h - 1e-12))
    i1 = int(math.floor(hi / h + 1e-12))
    if i1 > i0:
        w[i0:i1 + 1] = h
        w[i0] = h / 2.0
        w[i1] = h / 2.0
    if i0 > 0:
        a = i0 * h - lo  # width of the left fractional cell
        if a > 1e-15:
            frac = a / h
            w[i0 - 1] += a * frac / 2.0
            w[i0] += a * (1.0 - frac / 2.0)
    if i1 < n - 1:
        b = hi - i1 * h  # width of the right fractional cell
        if b > 1e-15:
            frac = b / h
            w[i1 + 1] += b * frac / 2.0
            w[i1] += b * (1.0 - frac / 2.0)
    if i1 < i0:
        # interval shorter than one cell: single trapezoid on [lo, hi]
        w[:] = 0.0
        width = hi - lo
        mid = (lo + hi) / 2.0
        j = int(mid / h)
        frac = mid / h - j
        w[j] = width * (1.0 - frac)
        w[j + 1] = width * frac
    return w


def interval_integrals(f: Potential, lo: float, hi: float) -> tuple[complex, float]:
    """(int_I f, int_I |f|) with the shared clipped-trapezoid rule."""
    w = _clipped_trapezoid_weights(f, lo, hi)
    return complex(np.sum(w * f.samples)), float(np.sum(w * np.abs(f.samples)))


def is_sigma_interval(f: Potential, lo: float, hi: float, sigma: float) -> bool:
    """True iff |int_I f| >= (1 - sigma) int_I |f| under the grid quadrature."""
    if not (0.0 < sigma < 1.0):
        raise DomainError(f"sigma must lie in (0,1), got {sigma}")
    total, absolute = interval_integrals(f, lo, hi)
    return abs(total) >= (1.0 - sigma) * absolute


def sector_integrals(f: Potential, lo: float, hi: float) -> np.ndarray:
    """The 16 masked integrals v_j = int_I f 1_{arg f in [j pi/8, (j+1) pi/8)}.

    Points with f = 0 contribute to no sector.
    """
    w = _clipped_trapezoid_weights(f, lo, hi)
    vals = f.samples
    nonzero = vals != 0
    sectors = np.zeros(f.n_samples, dtype=int)
    args = np.mod(np.angle(vals[nonzero]), 2.0 * math.pi)
    sectors[nonzero] = np.minimum((args / SECTOR_WIDTH).astype(int), SECTOR_COUNT - 1)
    v = np.zeros(SECTOR_COUNT, dtype=complex)
    for j in range(SECTOR_COUNT):
        mask = nonzero & (sectors == j)
        v[j] = np.sum(w[mask] * vals[mask])
    return v


def dominant_sector(f: Potential, interval: SigmaInterval) -> tuple[float, float, bool]:
    """Best quarter-turn phase window [phi, phi + pi/4] with phi = j pi/8.

    Returns (phi, mass_fraction, guaranteed) where guaranteed records whether
    the sigma <= 1e-5 precondition held so the lower bound 1 - 3e4*sigma applies.
    """
    v = sector_integrals(f, interval.lo, interval.hi)
    _, absolute = interval_integrals(f, interval.lo, interval.hi)
    if absolute == 0.0:
        return 0.0, 0.0, False
    window_mass = np.abs(v + np.roll(v, -1))
    j = int(np.argmax(window_mass))
    guaranteed = interval.sigma <= SIGMA_DEFAULT and is_sigma_interval(
        f, interval.lo, interval.hi, interval.sigma
    )
    return j * SECTOR_WIDTH, float(window_mass[j] / absolute), guaranteed


def find_sigma_intervals(
    f: Potential, sigma: float = SIGMA_DEFAULT, max_level: int = 6
) -> list[SigmaInterval]:
    """Enumerate dyadic subintervals of [0, T] that are sigma-intervals.

    Dyadic enumeration is a harness choice; any interval can be tested directly
    with ``is_sigma_interval``.
    """
    found = []
    T = f.support_end
    for level in range(max_level + 1):
        n = 2**level
        width = T / n
        for k in range(n):
            lo, hi = k * width, (k + 1) * width
            _, absolute = interval_integrals(f, lo, hi)
            if absolute <= 0.0:
                continue
            if is_sigma_interval(f, lo, hi, sigma):
                phi, frac, _ = dominant_sector(f, SigmaInterval(lo, hi, sigma))
                found.append(SigmaInterval(lo, hi, sigma, dominant_phase=phi))
    return found


def save_descriptor(f: Potential, path) -> None:
    Path(path).write_text(json.dumps(f.descriptor(), sort_keys=True, indent=2) + "\n")
