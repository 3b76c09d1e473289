"""ODE engines: the SU(1,1) transfer system and the coupled E-function jet system.

Both solvers are fixed-step classical RK4, vectorized over the frequency /
spectral-parameter axis, with the step density tied to the potential grid and
to the fastest oscillation present.  Time intervals on which the potential
vanishes (beyond the support, or a zero fixture) are propagated analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BlowupError, ConfigError, DomainError
from .potential import Potential, interval_integrals, simpson_weights

RESCALE_THRESHOLD = 1e6
MIN_STEPS = 64
OSCILLATION_NODES = 10.0  # steps per period of exp(2ixt)


# ---------------------------------------------------------------------------
# step control and time segmentation
# ---------------------------------------------------------------------------


def default_step_density(f: Potential, max_rate: float, multiplier: float = 1.0) -> float:
    """Target step size: the potential grid refined by `multiplier`, capped by
    pi / (10 * max_rate) so the fastest oscillation gets >= 10 nodes per period."""
    h = f.grid_step / max(multiplier, 1e-9)
    if max_rate > 0:
        h = min(h, math.pi / (OSCILLATION_NODES * max_rate))
    return h


def _build_segments(f: Potential, times: np.ndarray, h_target: float):
    """Split [0, t_end] at the record times and the support boundary.

    Returns a list of (t_start, t_end, n_substeps, is_free); n_substeps == 0
    marks analytic (free) propagation.
    """
    t_end = float(times[-1])
    T = f.support_end
    cuts = set(float(t) for t in times)
    cuts.add(0.0)
    if T < t_end - 1e-15:
        cuts.add(T)
    bounds = sorted(cuts)
    segments = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b - a <= 1e-15:
            continue
        free = f.is_zero or a >= T - 1e-15
        n = 0 if free else max(1, int(math.ceil((b - a) / h_target - 1e-9)))
        segments.append((a, b, n, free))
    return segments


# ---------------------------------------------------------------------------
# transfer system:  u = conj(b), v = a
# ---------------------------------------------------------------------------


def transfer_many(
    f: Potential,
    x: np.ndarray,
    times,
    steps: int | None = None,
    multiplier: float = 1.0,
):
    """Integrate the 2x2 transfer ODE for an array of real frequencies.

    Returns (a, b) arrays of shape (n_times, n_x) recorded at the given times.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) <= 0) or times[0] < 0:
        raise DomainError("record times must be nonnegative and strictly increasing")
    if steps is not None and steps < 2:
        raise ConfigError(f"steps must be >= 2, got {steps}")
    t_end = float(times[-1])
    if steps is not None:
        h_target = t_end / steps
    else:
        h_target = default_step_density(f, 2.0 * float(np.max(np.abs(x))), multiplier)

    u = np.zeros(x.shape, dtype=complex)
    v = np.ones(x.shape, dtype=complex)
    rec_a = np.empty((times.size, x.size), dtype=complex)
    rec_b = np.empty_like(rec_a)
    rec_idx = {round(float(t), 14): i for i, t in enumerate(times)}

    def record(t):
        i = rec_idx.get(round(t, 14))
        if i is not None:
            rec_a[i] = v
            rec_b[i] = np.conj(u)

    if 0.0 in rec_idx:
        record(0.0)

    two_ix = 2j * x
    for a0, b0, n, free in _build_segments(f, times, h_target):
        if free:
            record(b0)
            continue
        h = (b0 - a0) / n
        nodes = a0 + h * np.arange(n + 1)
        f_nodes = f.value(nodes)
        f_half = f.value(nodes[:-1] + h / 2.0)
        for k in range(n):
            t0 = nodes[k]
            f0, fh, f1 = f_nodes[k], f_half[k], f_nodes[k + 1]
            p0 = np.exp(-two_ix * t0)
            ph = np.exp(-two_ix * (t0 + h / 2.0))
            p1 = np.exp(-two_ix * (t0 + h))
            # k1
            du1 = p0 * f0 * v
            dv1 = np.conj(p0 * f0) * u
            # k2
            u2 = u + 0.5 * h * du1
            v2 = v + 0.5 * h * dv1
            du2 = ph * fh * v2
            dv2 = np.conj(ph * fh) * u2
            # k3
            u3 = u + 0.5 * h * du2
            v3 = v + 0.5 * h * dv2
            du3 = ph * fh * v3
            dv3 = np.conj(ph * fh) * u3
            # k4
            u4 = u + h * du3
            v4 = v + h * dv3
            du4 = p1 * f1 * v4
            dv4 = np.conj(p1 * f1) * u4
            u = u + (h / 6.0) * (du1 + 2.0 * (du2 + du3) + du4)
            v = v + (h / 6.0) * (dv1 + 2.0 * (dv2 + dv3) + dv4)
        record(b0)

    if not (np.all(np.isfinite(rec_a)) and np.all(np.isfinite(rec_b))):
        raise BlowupError("transfer integration produced non-finite values")
    return rec_a, rec_b


@dataclass(frozen=True)
class TransferCoefficients:
    a: complex
    b: complex
    t: float
    x: float

    @property
    def su11_residual(self) -> float:
        return abs(abs(self.a) ** 2 - abs(self.b) ** 2 - 1.0)


def integrate_transfer(
    f: Potential, x: float, t_end: float, steps: int | None = None
) -> TransferCoefficients:
    """Transfer coefficients (a, b) at frequency x and time t_end."""
    if t_end <= 0:
        raise DomainError(f"t_end must be positive, got {t_end}")
    a, b = transfer_many(f, np.array([x]), np.array([t_end]), steps=steps)
    return TransferCoefficients(a=complex(a[0, 0]), b=complex(b[0, 0]), t=t_end, x=x)


# ---------------------------------------------------------------------------
# E-function jet system
# ---------------------------------------------------------------------------


def _free_jet_propagate(Y: np.ndarray, log_scale: np.ndarray, z: np.ndarray, dt: float):
    """Exact propagation of the jet system over an interval where f == 0."""
    ncomp = Y.shape[0]
    P = np.exp(-1j * z * dt)
    Q = np.exp(1j * z * dt)
    out = np.empty_like(Y)
    out[0] = P * Y[0]
    out[1] = Q * Y[1]
    if ncomp >= 4:
        out[2] = P * (Y[2] - 1j * dt * Y[0])
        out[3] = Q * (Y[3] + 1j * dt * Y[1])
    if ncomp >= 6:
        out[4] = P * (Y[4] - 2j * dt * Y[2] - dt * dt * Y[0])
        out[5] = Q * (Y[5] + 2j * dt * Y[3] - dt * dt * Y[1])
    return out, log_scale.copy()


def _rescale(Y: np.ndarray, log_scale: np.ndarray):
    m = np.max(np.abs(Y), axis=0)
    mask = m > RESCALE_THRESHOLD
    if np.any(mask):
        Y[:, mask] /= m[mask]
        log_scale[mask] += np.log(m[mask])


def jet_evolution(
    f: Potential,
    z: np.ndarray,
    times,
    order: int = 2,
    steps: int | None = None,
    multiplier: float = 1.0,
):
    """Integrate the coupled system for (E, E#) and its z-derivative jets.

    Returns (Y, log_scale) with Y of shape (n_times, 2*(order+1), n_z): rows are
    [E, E#, E_z, E#_z, E_zz, E#_zz] truncated to the requested order, each
    scaled by exp(-log_scale) to keep magnitudes representable.
    """
    if order not in (0, 1, 2):
        raise ConfigError(f"order must be 0, 1 or 2, got {order}")
    if steps is not None and steps < 2:
        raise ConfigError(f"steps must be >= 2, got {steps}")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise DomainError("record times must be nonnegative and strictly increasing")
    t_end = float(times[-1])
    ncomp = 2 * (order + 1)

    if steps is not None:
        h_target = max(t_end, 1e-12) / steps
    else:
        h_target = default_step_density(f, float(np.max(np.abs(z))), multiplier)

    Y = np.zeros((ncomp, z.size), dtype=complex)
    Y[0] = 1.0
    Y[1] = 1.0
    log_scale = np.zeros(z.size)
    out = np.empty((times.size, ncomp, z.size), dtype=complex)
    out_ls = np.empty((times.size, z.size))
    rec_idx = {round(float(t), 14): i for i, t in enumerate(times)}

    def record(t):
        i = rec_idx.get(round(t, 14))
        if i is not None:
            out[i] = Y
            out_ls[i] = log_scale

    record(0.0)
    iz = 1j * z

    def rhs(Yc, fval):
        cf = np.conj(fval)
        d = np.empty_like(Yc)
        d[0] = -iz * Yc[0] + cf * Yc[1]
        d[1] = iz * Yc[1] + fval * Yc[0]
        if ncomp >= 4:
            d[2] = -1j * Yc[0] - iz * Yc[2] + cf * Yc[3]
            d[3] = 1j * Yc[1] + iz * Yc[3] + fval * Yc[2]
        if ncomp >= 6:
            d[4] = -2j * Yc[2] - iz * Yc[4] + cf * Yc[5]
            d[5] = 2j * Yc[3] + iz * Yc[5] + fval * Yc[4]
        return d

    if t_end > 0:
        for a0, b0, n, free in _build_segments(f, times, h_target):
            if free:
                Y, log_scale = _free_jet_propagate(Y, log_scale, z, b0 - a0)
                _rescale(Y, log_scale)
                record(b0)
                continue
            h = (b0 - a0) / n
            nodes = a0 + h * np.arange(n + 1)
            f_nodes = f.value(nodes)
            f_half = f.value(nodes[:-1] + h / 2.0)
            for k in range(n):
                f0, fh, f1 = f_nodes[k], f_half[k], f_nodes[k + 1]
                k1 = rhs(Y, f0)
                k2 = rhs(Y + 0.5 * h * k1, fh)
                k3 = rhs(Y + 0.5 * h * k2, fh)
                k4 = rhs(Y + h * k3, f1)
                Y = Y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
                _rescale(Y, log_scale)
            record(b0)

    if not np.all(np.isfinite(out)):
        raise BlowupError("E integration produced non-finite values after rescaling")
    return out, out_ls


@dataclass(frozen=True)
class EvolutionState:
    """Jet of (E, E#) at a single (t, z), with a common factor exp(log_scale) removed."""

    t: float
    z: complex
    order: int
    E: complex
    E_sharp: complex
    Ez: complex = 0.0
    Ez_sharp: complex = 0.0
    Ezz: complex = 0.0
    Ezz_sharp: complex = 0.0
    log_scale: float = 0.0

    def _val(self, c: complex) -> complex:
        return c * math.exp(self.log_scale)

    @property
    def E_value(self) -> complex:
        return self._val(self.E)

    @property
    def E_sharp_value(self) -> complex:
        return self._val(self.E_sharp)

    @property
    def Ez_value(self) -> complex:
        return self._val(self.Ez)

    @property
    def Ez_sharp_value(self) -> complex:
        return self._val(self.Ez_sharp)

    @property
    def Ezz_value(self) -> complex:
        return self._val(self.Ezz)

    @property
    def Ezz_sharp_value(self) -> complex:
        return self._val(self.Ezz_sharp)

    @property
    def log_abs_E(self) -> float:
        return math.log(abs(self.E)) + self.log_scale if self.E != 0 else -math.inf


def state_from_arrays(Y, log_scale, t, z, order) -> EvolutionState:
    comps = [complex(Y[i]) for i in range(Y.shape[0])]
    comps += [0.0] * (6 - len(comps))
    return EvolutionState(
        t=float(t), z=complex(z), order=order,
        E=comps[0], E_sharp=comps[1], Ez=comps[2], Ez_sharp=comps[3],
        Ezz=comps[4], Ezz_sharp=comps[5], log_scale=float(log_scale),
    )


def integrate_E(
    f: Potential,
    z: complex,
    t_end: float,
    steps: int | None = None,
    order: int = 2,
    multiplier: float = 1.0,
) -> EvolutionState:
    """E-function jet at (t_end, z); see `jet_evolution` for the ODE system."""
    if t_end < 0:
        raise DomainError(f"t_end must be nonnegative, got {t_end}")
    Y, ls = jet_evolution(f, np.array([z]), np.array([t_end]), order, steps, multiplier)
    return state_from_arrays(Y[-1, :, 0], ls[-1, 0], t_end, z, order)


def e_line_scan(
    f: Potential,
    z_grid: np.ndarray,
    t: float,
    order: int = 1,
    steps: int | None = None,
    multiplier: float = 1.0,
):
    """Jets at fixed time t over an array of spectral points (one vectorized pass)."""
    Y, ls = jet_evolution(f, z_grid, np.array([t]), order, steps, multiplier)
    return Y[-1], ls[-1]


def integrate_E_scalar(
    f: Potential,
    z: complex,
    t_end: float,
    steps: int | None = None,
    order: int = 2,
    multiplier: float = 1.0,
) -> EvolutionState:
    """Scalar-z twin of `integrate_E` in plain Python complex arithmetic.

    Same scheme and step rule as the array path; used where per-point overhead
    dominates (Riccati tracking, root refinement on single points).
    """
    if order not in (0, 1, 2):
        raise ConfigError(f"order must be 0, 1 or 2, got {order}")
    z = complex(z)
    if steps is not None:
        if steps < 2:
            raise ConfigError(f"steps must be >= 2, got {steps}")
        h_target = t_end / steps
    else:
        h_target = default_step_density(f, abs(z), multiplier)

    E, Es = 1.0 + 0.0j, 1.0 + 0.0j
    Ez = Ezs = Ezz = Ezzs = 0.0 + 0.0j
    log_scale = 0.0
    iz = 1j * z
    second = order >= 2
    first = order >= 1

    for a0, b0, n, free in _build_segments(f, np.array([t_end]), h_target):
        dt = b0 - a0
        if free:
            P, Q = np.exp(-iz * dt), np.exp(iz * dt)
            if second:
                Ezz = P * (Ezz - 2j * dt * Ez - dt * dt * E)
                Ezzs = Q * (Ezzs + 2j * dt * Ezs - dt * dt * Es)
            if first:
                Ez, Ezs = P * (Ez - 1j * dt * E), Q * (Ezs + 1j * dt * Es)
            E, Es = P * E, Q * Es
        else:
            h = dt / n
            nodes = a0 + h * np.arange(n + 1)
            fn = f.value(nodes)
            fh = f.value(nodes[:-1] + h / 2.0)
            for k in range(n):
                fv = (fn[k], fh[k], fh[k], fn[k + 1])
                cf = tuple(x.conjugate() for x in fv)
                acc = [0.0 + 0j] * 6
                yE, yEs, yEz, yEzs, yEzz, yEzzs = E, Es, Ez, Ezs, Ezz, Ezzs
                for stage, wgt in ((0, 1.0), (1, 2.0), (2, 2.0), (3, 1.0)):
                    dE = -iz * yE + cf[stage] * yEs
                    dEs = iz * yEs + fv[stage] * yE
                    if first:
                        dEz = -1j * yE - iz * yEz + cf[stage] * yEzs
                        dEzs = 1j * yEs + iz * yEzs + fv[stage] * yEz
                    else:
                        dEz = dEzs = 0.0
                    if second:
                        dEzz = -2j * yEz - iz * yEzz + cf[stage] * yEzzs
                        dEzzs = 2j * yEzs + iz * yEzzs + fv[stage] * yEzz
                    else:
                        dEzz = dEzzs = 0.0
                    acc[0] += wgt * dE
                    acc[1] += wgt * dEs
                    acc[2] += wgt * dEz
                    acc[3] += wgt * dEzs
                    acc[4] += wgt * dEzz
                    acc[5] += wgt * dEzzs
                    if stage < 3:
                        step = h if stage == 2 else 0.5 * h
                        yE = E + step * dE
                        yEs = Es + step * dEs
                        yEz = Ez + step * dEz
                        yEzs = Ezs + step * dEzs
                        yEzz = Ezz + step * dEzz
                        yEzzs = Ezzs + step * dEzzs
                c = h / 6.0
                E += c * acc[0]
                Es += c * acc[1]
                Ez += c * acc[2]
                Ezs += c * acc[3]
                Ezz += c * acc[4]
                Ezzs += c * acc[5]
                m = max(abs(E), abs(Es), abs(Ez), abs(Ezs), abs(Ezz), abs(Ezzs))
                if m > RESCALE_THRESHOLD:
                    inv = 1.0 / m
                    E *= inv
                    Es *= inv
                    Ez *= inv
                    Ezs *= inv
                    Ezz *= inv
                    Ezzs *= inv
                    log_scale += math.log(m)
        m = max(abs(E), abs(Es), abs(Ez), abs(Ezs), abs(Ezz), abs(Ezzs))
        if m > RESCALE_THRESHOLD:
            inv = 1.0 / m
            E, Es, Ez, Ezs = E * inv, Es * inv, Ez * inv, Ezs * inv
            Ezz, Ezzs = Ezz * inv, Ezzs * inv
            log_scale += math.log(m)

    vals = (E, Es, Ez, Ezs, Ezz, Ezzs)
    if not all(math.isfinite(v.real) and math.isfinite(v.imag) for v in vals):
        raise BlowupError("scalar E integration produced non-finite values")
    return EvolutionState(
        t=t_end, z=z, order=order,
        E=E, E_sharp=Es, Ez=Ez, Ez_sharp=Ezs, Ezz=Ezz, Ezz_sharp=Ezzs,
        log_scale=log_scale,
    )


# ---------------------------------------------------------------------------
# pair (E, Etilde) and derived quantities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairState:
    state: EvolutionState
    state_tilde: EvolutionState

    @property
    def det_residual(self) -> complex:
        s, st = self.state, self.state_tilde
        scale = math.exp(s.log_scale + st.log_scale)
        det = scale * (s.E * st.E_sharp - s.E_sharp * st.E)
        return det - 2j

    @property
    def a_value(self) -> complex:
        """a(t,z) recovered from the pair: (e^{itz}/2) (E + i Etilde)."""
        s, st = self.state, self.state_tilde
        return 0.5 * (
            np.exp(1j * s.t * s.z + s.log_scale) * s.E
            + 1j * np.exp(1j * st.t * st.z + st.log_scale) * st.E
        )


def evaluate_pair(
    f: Potential, z: complex, t: float, order: int = 2, steps: int | None = None
) -> PairState:
    """States for E (potential f) and Etilde = -i * E_{-f} at the same (t, z)."""
    st = integrate_E(f, z, t, steps, order)
    g = integrate_E(f.rescale_amplitude(-1.0), z, t, steps, order)
    tilde = EvolutionState(
        t=g.t, z=g.z, order=g.order,
        E=-1j * g.E, E_sharp=1j * g.E_sharp,
        Ez=-1j * g.Ez, Ez_sharp=1j * g.Ez_sharp,
        Ezz=-1j * g.Ezz, Ezz_sharp=1j * g.Ezz_sharp,
        log_scale=g.log_scale,
    )
    return PairState(state=st, state_tilde=tilde)


def scattering(state: EvolutionState) -> complex:
    """Scattering function  e^{itz} E(t,z), with the scale folded into the exponent."""
    return complex(np.exp(1j * state.t * state.z + state.log_scale) * state.E)


# ---------------------------------------------------------------------------
# Gronwall envelopes
# ---------------------------------------------------------------------------


def _partial_l1(f: Potential, t1: float, t2: float) -> float:
    t1 = max(0.0, min(t1, f.support_end))
    t2 = max(0.0, min(t2, f.support_end))
    if t2 - t1 <= 1e-15:
        return 0.0
    return interval_integrals(f, t1, t2)[1]


def gronwall_envelope(f: Potential, z: complex, t: float) -> float:
    """Upper envelope exp(t |Im z| + int_0^t |f|) for |E(t,z)|."""
    return math.exp(t * abs(z.imag) + _partial_l1(f, 0.0, t))


def gronwall_increment(
    f: Potential, z: complex, t1: float, t2: float, e_conj_mag: float
) -> float:
    """Stated envelope for |scattering(t1) - scattering(t2)|.

    `e_conj_mag` is |E(t1, conj(z))| (equal to |E#(t1, z)|).
    """
    if t2 < t1:
        raise DomainError("need t1 <= t2")
    mass = _partial_l1(f, t1, t2)
    return e_conj_mag * math.exp((t2 - t1) * (abs(z.imag) - z.imag) + mass) * mass


def gronwall_increment_appendix(f: Potential, z: complex, t1: float, t2: float) -> float:
    """Alternative envelope appearing in the appendix derivation."""
    if t2 < t1:
        raise DomainError("need t1 <= t2")
    mass = _partial_l1(f, t1, t2)
    return math.exp((2.0 * t2 - t1) * abs(z.imag) + mass) * mass


# ---------------------------------------------------------------------------
# polar flow on the real axis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarFlow:
    times: np.ndarray
    magnitude: np.ndarray
    phase: np.ndarray  # continuous (unwrapped) argument of E(t, x)
    crosscheck: float | None  # polar-vs-cartesian deviation, real potentials only
    polar_used: bool


def magnitude_phase_flow(f: Potential, x: float, t_grid) -> PolarFlow:
    """|E(t,x)| and the continuous argument along a time grid, for real x.

    The cartesian jet integration is the reference; for real-valued potentials
    the explicit polar ODE is also integrated and compared.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be nonnegative and increasing")
    rate = abs(x) + 2.0 * float(np.max(np.abs(f.samples))) + 1.0
    fine = [0.0]
    prev = 0.0
    for tau in t_grid:
        if tau > prev + 1e-15:
            n_sub = max(1, int(math.ceil((tau - prev) * rate / 0.25)))
            fine.extend(np.linspace(prev, tau, n_sub + 1)[1:].tolist())
            prev = tau
    fine = np.asarray(fine)
    if fine.size > 1:
        Y, ls = jet_evolution(f, np.array([complex(x)]), fine[1:], order=0)
        E_path = np.concatenate([[1.0 + 0j], Y[:, 0, 0] * np.exp(ls[:, 0])])
    else:
        E_path = np.array([1.0 + 0j])
    if np.any(np.abs(E_path) < 1e-12):
        raise BlowupError("|E| vanished on the real axis (should be impossible)")
    mag = np.abs(E_path)
    phase = np.unwrap(np.angle(E_path))
    idx = np.searchsorted(fine, t_grid)

    crosscheck = None
    polar_used = False
    max_im = float(np.max(np.abs(f.samples.imag)))
    max_ab = float(np.max(np.abs(f.samples)))
    if max_ab == 0.0 or max_im <= 1e-14 * max(max_ab, 1.0):
        polar_used = True
        rho = np.zeros(fine.size)
        phi = np.zeros(fine.size)
        f_re = lambda t: f.value(t).real
        for k in range(fine.size - 1):
            h = fine[k + 1] - fine[k]
            t0 = fine[k]
            p, r = phi[k], rho[k]
            f0, fh, f1 = f_re(t0), f_re(t0 + h / 2.0), f_re(t0 + h)

            def drho_dphi(fv, pv):
                return fv * math.cos(2.0 * pv), -x - fv * math.sin(2.0 * pv)

            dr1, dp1 = drho_dphi(f0, p)
            dr2, dp2 = drho_dphi(fh, p + 0.5 * h * dp1)
            dr3, dp3 = drho_dphi(fh, p + 0.5 * h * dp2)
            dr4, dp4 = drho_dphi(f1, p + h * dp3)
            rho[k + 1] = r + (h / 6.0) * (dr1 + 2.0 * (dr2 + dr3) + dr4)
            phi[k + 1] = p + (h / 6.0) * (dp1 + 2.0 * (dp2 + dp3) + dp4)
        crosscheck = float(
            max(np.max(np.abs(np.exp(rho) - mag)), np.max(np.abs(phi - phase)))
        )
    return PolarFlow(
        times=t_grid,
        magnitude=mag[idx],
        phase=phase[idx],
        crosscheck=crosscheck,
        polar_used=polar_used,
    )


# ---------------------------------------------------------------------------
# linearization
# ---------------------------------------------------------------------------


def nlft_linear_term(f: Potential, x_grid: np.ndarray) -> np.ndarray:
    """First variation of b in the potential: int_0^T conj(f(tau)) e^{2 i x tau} dtau."""
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    tau = f.time_grid
    w = simpson_weights(f.n_samples, f.grid_step)
    kernel = np.exp(2j * np.outer(x_grid, tau))
    return kernel @ (w * np.conj(f.samples))


def linearization_residual(
    f: Potential, x_grid: np.ndarray, amplitude: float, steps: int | None = None
) -> tuple[float, float]:
    """(sup |b - linear term|, sup |a - 1|) for the scaled potential amplitude * f."""
    if amplitude < 0:
        raise DomainError("amplitude must be nonnegative")
    if amplitude * f.l1 > 0.5 + 1e-12:
        raise DomainError("amplitude * ||f||_1 must stay <= 1/2")
    if amplitude == 0.0:
        return 0.0, 0.0
    scaled = f.rescale_amplitude(amplitude)
    a, b = transfer_many(scaled, x_grid, np.array([f.support_end]), steps=steps)
    b_lin = amplitude * nlft_linear_term(f, x_grid)
    return (
        float(np.max(np.abs(b[-1] - b_lin))),
        float(np.max(np.abs(a[-1] - 1.0))),
    )
