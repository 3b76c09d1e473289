"""Zeros of E(t, .) in the lower half-plane: location, jets, tracking, regions.

Location is by argument-principle winding counts over vertical strips tiling a
search rectangle, with Gauss-Legendre panels on the edges and the co-integrated
derivative E_z in the integrand, followed by batched Newton refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .engine import EvolutionState, e_line_scan, integrate_E_scalar, state_from_arrays
from .errors import ConsistencyError, DomainError, PoleError
from .potential import Potential

NEWTON_TOL_FACTOR = 1e-11   # |dz| tolerance is NEWTON_TOL_FACTOR / t
EDGE_NUDGE_FACTOR = math.pi / 20.0
CONTOUR_TOL = 0.05          # acceptable distance of a winding from an integer
DEFAULT_DEPTH_Y = 8.0       # default search depth in units of 1/t


@dataclass(frozen=True)
class ZeroRecord:
    """A located zero of E(t, .) (or of the flipped-potential function)."""

    z0: complex
    t: float
    s: float
    rank: int
    side: str                # 'left' | 'right' of s
    alpha: complex           # -i * exp(-i arg E#(t, z0)), unimodular
    newton_residual: float   # estimated distance |E / E_z| at the accepted point

    @property
    def X(self) -> float:
        return self.t * (self.z0.real - self.s)

    @property
    def Y(self) -> float:
        return self.t * abs(self.z0.imag)


@dataclass(frozen=True)
class ThetaJet:
    t: float
    z: complex
    theta: complex
    theta_z: complex
    theta_zz: complex


@dataclass(frozen=True)
class ZeroPath:
    """A zero of E tracked over [t1, t2] by the Riccati velocity."""

    times: np.ndarray
    zeros: np.ndarray              # zeros of E, lower half-plane
    theta_z: np.ndarray            # theta_z at the conjugated (tracked) points
    theta_zz: np.ndarray
    anchor_residuals: np.ndarray   # Newton correction sizes per accepted step
    s: float | None = None

    @property
    def xi1(self) -> complex:
        return complex(self.zeros[0])

    @property
    def xi2(self) -> complex:
        return complex(self.zeros[-1])


@dataclass(frozen=True)
class RegionFlags:
    in_omega: bool
    in_omega_tilde: bool
    in_xi: bool
    D: float
    margin_omega: float        # e^{2t Im z} / ((t|z-s|)^{3/2} eps); >= D means inside
    margin_omega_tilde: float
    margin_xi: float
    Y: float
    Y_tilde: float


# ---------------------------------------------------------------------------
# location
# ---------------------------------------------------------------------------


def _log_abs(Y_row, ls) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(Y_row)) + ls


def _gauss_panel_nodes(p: complex, q: complex, panels: int, order: int = 8):
    """Gauss-Legendre nodes and directed weights for int_p^q along the segment."""
    xi, wq = np.polynomial.legendre.leggauss(order)
    direction = q - p
    bounds = np.linspace(0.0, 1.0, panels + 1)
    nodes, weights = [], []
    for a, b in zip(bounds[:-1], bounds[1:]):
        mid, half = (a + b) / 2.0, (b - a) / 2.0
        u = mid + half * xi
        nodes.append(p + direction * u)
        weights.append(direction * half * wq)
    return np.concatenate(nodes), np.concatenate(weights)


def _rect_edges(x0, x1, y0, y1):
    """Counterclockwise edge endpoints for the rectangle [x0,x1] x [y0,y1]."""
    return [
        (complex(x0, y0), complex(x1, y0)),
        (complex(x1, y0), complex(x1, y1)),
        (complex(x1, y1), complex(x0, y1)),
        (complex(x0, y1), complex(x0, y0)),
    ]


def _windings(f, t, rects, steps, resolution, multiplier=1.0):
    """Winding numbers of E(t, .) around each rectangle, one batched jet pass.

    Returns (windings array, contour min log|E| per rect, contour median log|E|).
    """
    all_nodes, all_weights, slices = [], [], []
    pos = 0
    for (x0, x1, y0, y1) in rects:
        n0 = pos
        for p, q in _rect_edges(x0, x1, y0, y1):
            panels = max(1, int(math.ceil(abs(q - p) * t / math.pi))) * resolution
            nodes, weights = _gauss_panel_nodes(p, q, panels)
            all_nodes.append(nodes)
            all_weights.append(weights)
            pos += nodes.size
        slices.append((n0, pos))
    nodes = np.concatenate(all_nodes)
    weights = np.concatenate(all_weights)
    Y, ls = e_line_scan(f, nodes, t, order=1, steps=steps, multiplier=multiplier)
    ratio = Y[2] / Y[0]  # E_z / E, scale cancels
    logabs = _log_abs(Y[0], ls)
    integrand = weights * ratio
    windings = np.empty(len(rects))
    min_log = np.empty(len(rects))
    for i, (a, b) in enumerate(slices):
        windings[i] = (np.sum(integrand[a:b]) / (2j * math.pi)).real
        min_log[i] = np.min(logabs[a:b])
    return windings, min_log, float(np.median(logabs))


def _interior_minima(f, t, rects, steps, nx=9, ny=7, multiplier=1.0):
    """argmin of log|E| over a coarse interior grid of each rectangle."""
    pts = []
    for (x0, x1, y0, y1) in rects:
        gx = np.linspace(x0, x1, nx + 2)[1:-1]
        gy = np.linspace(y0, y1, ny + 2)[1:-1]
        pts.append((gx[None, :] + 1j * gy[:, None]).ravel())
    allpts = np.concatenate(pts)
    Y, ls = e_line_scan(f, allpts, t, order=0, steps=steps, multiplier=multiplier)
    logabs = _log_abs(Y[0], ls)
    out = []
    k = nx * ny
    for i in range(len(rects)):
        block = logabs[i * k:(i + 1) * k]
        out.append(complex(pts[i][int(np.argmin(block))]))
    return out


def _newton_polish(f, t, seeds, steps, tol, multiplier=1.0):
    z = np.array(seeds, dtype=complex)
    residual = np.full(z.size, np.inf)
    active = np.ones(z.size, dtype=bool)
    for _ in range(50):
        if not np.any(active):
            break
        Y, ls = e_line_scan(f, z[active], t, order=1, steps=steps, multiplier=multiplier)
        E, Ez = Y[0], Y[2]
        if np.any(Ez == 0):
            raise ConsistencyError("vanishing E_z during Newton refinement")
        dz = E / Ez
        z[active] = z[active] - dz
        res = np.abs(dz)
        idx = np.where(active)[0]
        residual[idx] = res
        done = res < tol
        active[idx[done]] = False
    if np.any(active):
        raise ConsistencyError(
            f"Newton refinement did not converge within 50 iterations "
            f"(worst |dz| = {residual.max():.3e})"
        )
    return z, residual


def locate_zeros(
    f: Potential,
    t: float,
    s: float,
    count: int = 6,
    depth_cap: float | None = None,
    steps: int | None = None,
    resolution: int = 1,
    multiplier: float = 1.0,
) -> list[ZeroRecord]:
    """Zeros of E(t, .) in R(s, (count+2) pi/t, depth_cap), sorted by |z - s|.

    Winding counts on vertical strips (argument principle with the co-integrated
    E_z), Newton refinement, and a global winding-vs-count consistency check.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    if depth_cap is None:
        depth_cap = DEFAULT_DEPTH_Y / t
    if depth_cap * t > 20.0 + 1e-9:
        raise DomainError("depth_cap * t must stay <= 20 (overflow budget)")
    half_width = (count + 2) * math.pi / t
    n_strips = 2 * (count + 2)
    cuts = np.linspace(s - half_width, s + half_width, n_strips + 1)
    y_bottom = -depth_cap
    nudge = EDGE_NUDGE_FACTOR / t

    # nudge vertical cuts (and the bottom) away from zeros sitting on them
    for attempt in range(3):
        probe_cols = [c + 1j * np.linspace(y_bottom, 0.0, 17)[:-1] for c in cuts]
        probe_bot = [np.linspace(cuts[0], cuts[-1], 8 * n_strips) + 1j * y_bottom]
        probes = np.concatenate(probe_cols + probe_bot)
        Yp, lsp = e_line_scan(f, probes, t, order=0, steps=steps, multiplier=multiplier)
        logabs = _log_abs(Yp[0], lsp)
        scale = np.median(logabs)
        ncol = 16
        moved = False
        for i in range(cuts.size):
            if np.min(logabs[i * ncol:(i + 1) * ncol]) < scale - 13.8:  # 1e-6 rel
                cuts[i] += nudge
                moved = True
        if np.min(logabs[cuts.size * ncol:]) < scale - 13.8:
            y_bottom -= nudge
            moved = True
        if not moved:
            break

    level = [(cuts[i], cuts[i + 1], y_bottom, 0.0) for i in range(n_strips)]
    unit_rects = []
    total_winding = 0
    for depth in range(8):
        if not level:
            break
        res = resolution
        windings, _, _ = _windings(f, t, level, steps, res, multiplier)
        refined, _, _ = _windings(f, t, level, steps, 2 * res, multiplier)
        next_level = []
        for rect, w1, w2 in zip(level, windings, refined):
            if abs(w2 - round(w2)) > CONTOUR_TOL or round(w1) != round(w2):
                w4, _, _ = _windings(f, t, [rect], steps, 4 * res, multiplier)
                w2 = float(w4[0])
                if abs(w2 - round(w2)) > CONTOUR_TOL:
                    raise ConsistencyError(
                        f"winding {w2:.3f} not near an integer on rect {rect}"
                    )
            k = int(round(w2))
            if depth == 0:
                total_winding += k
            if k == 0:
                continue
            if k == 1:
                unit_rects.append(rect)
            else:
                x0, x1, y0, y1 = rect
                xm = 0.5 * (x0 + x1)
                # keep the split line off zeros
                col = xm + 1j * np.linspace(y0, y1, 17)[1:-1]
                Yc, lsc = e_line_scan(f, col, t, order=0, steps=steps, multiplier=multiplier)
                if np.min(_log_abs(Yc[0], lsc)) < -10:
                    xm += nudge
                next_level.append((x0, xm, y0, y1))
                next_level.append((xm, x1, y0, y1))
        level = next_level
    if level:
        raise ConsistencyError("rectangle subdivision exceeded depth 8")

    if not unit_rects:
        return []
    seeds = _interior_minima(f, t, unit_rects, steps, multiplier=multiplier)
    tol = NEWTON_TOL_FACTOR / t
    zs, residuals = _newton_polish(f, t, seeds, steps, tol, multiplier=multiplier)

    # dedupe and sanity-check against the total winding
    order_idx = np.argsort(zs.real)
    kept = []
    for i in order_idx:
        if kept and abs(zs[i] - zs[kept[-1]]) < 1e-9 / t:
            continue
        kept.append(i)
    if len(kept) != total_winding:
        raise ConsistencyError(
            f"argument principle counted {total_winding} zeros but refinement "
            f"produced {len(kept)}"
        )

    Yf, lsf = e_line_scan(f, zs[kept], t, order=1, steps=steps, multiplier=multiplier)
    records = []
    for j, i in enumerate(kept):
        z0 = complex(zs[i])
        if z0.imag >= 0:
            raise ConsistencyError(f"located zero {z0} not in the lower half-plane")
        kappa = complex(Yf[1, j])
        alpha = -1j * np.conj(kappa) / abs(kappa)
        records.append(
            ZeroRecord(
                z0=z0, t=t, s=s, rank=-1,
                side="left" if z0.real < s else "right",
                alpha=complex(alpha),
                newton_residual=float(residuals[i]),
            )
        )
    records.sort(key=lambda r: (abs(r.z0 - s), r.z0.real))
    return [
        ZeroRecord(
            z0=r.z0, t=r.t, s=r.s, rank=k, side=r.side, alpha=r.alpha,
            newton_residual=r.newton_residual,
        )
        for k, r in enumerate(records)
    ]


# ---------------------------------------------------------------------------
# theta jets
# ---------------------------------------------------------------------------


def theta_from_state(state: EvolutionState) -> ThetaJet:
    """theta = E#/E and its first two z-derivatives by the quotient rule."""
    E, Es = state.E, state.E_sharp
    if abs(E) < 1e-12:
        raise PoleError(f"E too small at z={state.z} for a theta evaluation")
    Ez, Ezs = state.Ez, state.Ez_sharp
    Ezz, Ezzs = state.Ezz, state.Ezz_sharp
    theta = Es / E
    theta_z = (Ezs * E - Es * Ez) / (E * E)
    theta_zz = (Ezzs * E - Es * Ezz) / (E * E) - 2.0 * Ez * (Ezs * E - Es * Ez) / (E**3)
    return ThetaJet(t=state.t, z=state.z, theta=theta, theta_z=theta_z, theta_zz=theta_zz)


def theta_jet(
    f: Potential, t: float, z: complex, steps: int | None = None, multiplier: float = 1.0
) -> ThetaJet:
    return theta_from_state(integrate_E_scalar(f, z, t, steps=steps, order=2, multiplier=multiplier))


# ---------------------------------------------------------------------------
# Riccati tracking
# ---------------------------------------------------------------------------


def track_zero(
    f: Potential,
    t1: float,
    t2: float,
    seed,
    steps: int = 48,
    anchor: bool = True,
    inner_steps: int | None = None,
    s: float | None = None,
    multiplier: float = 1.0,
) -> ZeroPath:
    """Track a zero of E from t1 to t2 along z'(t) = -f(t) / theta_z(t, z(t)).

    The Riccati velocity lives at the conjugated point (the tracked curve is a
    zero of theta, i.e. the mirror of a zero of E); the returned path reports
    zeros of E in the lower half-plane.  With ``anchor`` a Newton correction on
    E re-centers every accepted step; a correction larger than 10% of the step
    displacement halves the step.
    """
    if t2 <= t1 or t1 <= 0:
        raise DomainError("need 0 < t1 < t2")
    z0 = seed.z0 if isinstance(seed, ZeroRecord) else complex(seed)
    if z0.imag >= 0:
        raise DomainError("seed zero must lie in the lower half-plane")
    if s is None and isinstance(seed, ZeroRecord):
        s = seed.s

    def velocity(t, zeta):
        st = integrate_E_scalar(f, zeta, t, steps=inner_steps, order=1, multiplier=multiplier)
        jet = theta_from_state(st)
        Y_loc = t * abs(zeta.imag)
        if abs(jet.theta_z) < 1e-3 * t * math.exp(-2.0 * Y_loc):
            raise PoleError(
                f"theta_z nearly degenerate at t={t:.4f}, z={zeta:.6f}"
            )
        return -f.value(t) / jet.theta_z

    def jets_at(t, zeta):
        st = integrate_E_scalar(f, zeta, t, steps=inner_steps, order=2, multiplier=multiplier)
        return theta_from_state(st)

    def newton_anchor(t, xi):
        # xi is the zero of E (lower half-plane)
        total = 0.0
        for _ in range(3):
            st = integrate_E_scalar(f, xi, t, steps=inner_steps, order=1, multiplier=multiplier)
            dz = st.E / st.Ez
            xi = xi - dz
            total += abs(dz)
            if abs(dz) < NEWTON_TOL_FACTOR / t:
                break
        return xi, total

    t_nodes = [t1]
    zeta = np.conj(z0)
    zetas = [zeta]
    anchors = [0.0]
    h_base = (t2 - t1) / steps
    t = t1
    while t < t2 - 1e-14:
        h = min(h_base, t2 - t)
        halvings = 0
        while True:
            k1 = velocity(t, zeta)
            k2 = velocity(t + h / 2.0, zeta + 0.5 * h * k1)
            k3 = velocity(t + h / 2.0, zeta + 0.5 * h * k2)
            k4 = velocity(t + h, zeta + h * k3)
            step = (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            znew = zeta + step
            if anchor:
                xi_new, corr = newton_anchor(t + h, np.conj(znew))
                if abs(step) > 0 and corr > 0.1 * abs(step) and halvings < 8:
                    h /= 2.0
                    halvings += 1
                    continue
                znew = np.conj(xi_new)
            else:
                corr = 0.0
            break
        if abs(znew - zeta) > math.pi / (2.0 * (t + h)):
            raise ConsistencyError("tracked zero jumped by more than pi/(2t)")
        t += h
        zeta = znew
        t_nodes.append(t)
        zetas.append(zeta)
        anchors.append(corr)

    times = np.array(t_nodes)
    zetas = np.array(zetas)
    tz = np.empty(times.size, dtype=complex)
    tzz = np.empty(times.size, dtype=complex)
    for i, (tt, zz) in enumerate(zip(times, zetas)):
        jet = jets_at(tt, zz)
        tz[i] = jet.theta_z
        tzz[i] = jet.theta_zz
    return ZeroPath(
        times=times,
        zeros=np.conj(zetas),
        theta_z=tz,
        theta_zz=tzz,
        anchor_residuals=np.array(anchors),
        s=s,
    )


# ---------------------------------------------------------------------------
# region membership
# ---------------------------------------------------------------------------


def omega_margin(zero: ZeroRecord, eps: float) -> float:
    """e^{2 t Im z} / ((t |z - s|)^{3/2} eps); membership in Omega^D is margin >= D."""
    lhs = math.exp(-2.0 * zero.Y)
    rhs = (zero.t * abs(zero.z0 - zero.s)) ** 1.5 * eps
    return math.inf if rhs == 0 else lhs / rhs


def xi_margin(zero: ZeroRecord, mu: float) -> float:
    lhs = math.exp(-4.0 * zero.Y)
    rhs = math.sqrt(zero.Y) * mu
    return math.inf if rhs == 0 else lhs / rhs


def region_flags(
    zero: ZeroRecord,
    zero_tilde: ZeroRecord,
    eps: float,
    eps_tilde: float,
    D: float,
) -> RegionFlags:
    """Membership of (t, s) in Omega^D, tilde-Omega^D and Xi^D for the given zeros."""
    m1 = omega_margin(zero, eps)
    m2 = omega_margin(zero_tilde, eps_tilde)
    m3 = xi_margin(zero, eps + eps_tilde)
    in_o = m1 >= D
    in_ot = m2 >= D
    return RegionFlags(
        in_omega=in_o,
        in_omega_tilde=in_ot,
        in_xi=in_o and in_ot and m3 >= D,
        D=D,
        margin_omega=m1,
        margin_omega_tilde=m2,
        margin_xi=m3,
        Y=zero.Y,
        Y_tilde=zero_tilde.Y,
    )


# ---------------------------------------------------------------------------
# the positive point x0 and beta
# ---------------------------------------------------------------------------


def x0_beta(
    f: Potential,
    t: float,
    s: float,
    steps: int | None = None,
    n_scan: int = 1025,
    multiplier: float = 1.0,
) -> tuple[float, complex]:
    """Nearest real x to s with E(t, x) positive real, and beta = e^{i t x0}.

    Scans (s - 4 pi/t, s + 4 pi/t) for sign changes of Im E with Re E > 0 and
    refines by Brent's method on Im E.
    """
    width = 4.0 * math.pi / t
    grid = np.linspace(s - width, s + width, n_scan)
    Y, ls = e_line_scan(f, grid.astype(complex), t, order=0, steps=steps, multiplier=multiplier)
    E = Y[0]  # common positive scale irrelevant for sign/argument work
    imE, reE = E.imag, E.real
    candidates = []
    for i in range(n_scan - 1):
        if imE[i] == 0.0 and reE[i] > 0:
            candidates.append(grid[i])
            continue
        if imE[i] * imE[i + 1] < 0 and (reE[i] > 0 or reE[i + 1] > 0):
            def im_at(x):
                st = integrate_E_scalar(f, complex(x), t, steps=steps, order=0,
                                        multiplier=multiplier)
                return st.E.imag
            root = brentq(im_at, grid[i], grid[i + 1], xtol=1e-13, rtol=8.9e-16)
            st = integrate_E_scalar(f, complex(root), t, steps=steps, order=0,
                                    multiplier=multiplier)
            if st.E.real > 0:
                candidates.append(float(root))
    if not candidates:
        raise ConsistencyError(
            "no positive point of E found within (s - 4pi/t, s + 4pi/t); "
            "the full-rotation estimate fails here (error gauge too large)"
        )
    x0 = min(candidates, key=lambda x: abs(x - s))
    return float(x0), complex(np.exp(1j * t * x0))
