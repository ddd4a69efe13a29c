"""Adaptive quadrature over the in-plane wavevector and over frequency.

The (k_par, phi) integrals are split at the light line.  On the propagating
side ``k_par = k0 sin(theta)`` and on the evanescent side
``k_par = k0 cosh(u)``; both Jacobians equal ``|k_z|`` so the integrable
``1/k_z`` edge disappears.  Each side is integrated by vectorized adaptive
Gauss-Kronrod (7/15) panels, and phi by a periodic trapezoid rule whose
error is estimated from the half-order rule.  All panel nodes of one
refinement pass are evaluated in a single integrand call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.constants import c as C_LIGHT

from .errors import ConfigurationError, QuadratureError, TailDominatedError
from .fresnel import ModeCoords, mode_coords

__all__ = ["QuadConfig", "QuadResult", "integrate_kphi", "integrate_omega"]

# Kronrod 15-point abscissae on [0, 1] (symmetric), with 7-point Gauss weights
_XK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
XK = np.concatenate([-_XK[:-1], _XK[::-1]])
WK = np.concatenate([_WK[:-1], _WK[::-1]])
WG = np.zeros(15)
WG[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])

_PHI_ORDER_MAX = 4096
# initial panels on the propagating and evanescent sides
_INIT_PANELS = (2, 4)


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and resolution of the adaptive integrators.

    ``rel_tol`` is measured against the integral of the absolute integrand
    of each component, which keeps the criterion meaningful for components
    that cancel (lateral force, lateral torque).  ``abs_tol`` is an
    absolute floor in output units.
    """

    rel_tol: float = 1e-6
    abs_tol: float = 1e-250
    k_par_max_factor: float = 40.0
    max_subdivisions: int = 2000
    phi_order: int = 64

    def __post_init__(self):
        if not (self.rel_tol > 0):
            raise ConfigurationError("must be > 0", "quadrature.rel_tol")
        if not (self.abs_tol > 0):
            raise ConfigurationError("must be > 0", "quadrature.abs_tol")
        if not (self.k_par_max_factor >= 10):
            raise ConfigurationError("must be >= 10", "quadrature.k_par_max_factor")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ConfigurationError("must be a positive integer", "quadrature.max_subdivisions")
        if int(self.phi_order) != self.phi_order or self.phi_order < 16 or self.phi_order % 2:
            raise ConfigurationError("must be an even integer >= 16", "quadrature.phi_order")

    @classmethod
    def from_dict(cls, entry):
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(entry) - allowed
        if unknown:
            raise ConfigurationError(f"unknown keys {sorted(unknown)}", "quadrature")
        return cls(**entry)

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class QuadResult:
    """Integral value (array over components), error estimate and diagnostics."""

    value: np.ndarray
    error: np.ndarray
    n_panels: int = 0
    phi_order: int = 0
    tail: np.ndarray | None = None
    info: dict = field(default_factory=dict)


def _tolerance(abs_int, cfg):
    return np.maximum(cfg.abs_tol, cfg.rel_tol * abs_int)


def _checked(n, checked):
    mask = np.zeros(n, dtype=bool)
    mask[np.arange(n) if checked is None else np.asarray(checked)] = True
    return mask


class _PanelSet:
    """Pool of Gauss-Kronrod panels with their per-component estimates."""

    def __init__(self):
        self.a = np.empty(0)
        self.b = np.empty(0)
        self.tag = np.empty(0, dtype=int)
        self.kron = None
        self.err = None
        self.absint = None
        self.extra = None

    def replace(self, keep, a, b, tag, kron, err, absint, extra):
        if self.kron is None:
            self.a, self.b, self.tag = a, b, tag
            self.kron, self.err, self.absint, self.extra = kron, err, absint, extra
            return
        cat = lambda old, new, ax: np.concatenate([np.compress(keep, old, axis=ax), new], axis=ax)  # noqa: E731
        self.a, self.b, self.tag = cat(self.a, a, 0), cat(self.b, b, 0), cat(self.tag, tag, 0)
        self.kron = cat(self.kron, kron, -1)
        self.err = cat(self.err, err, -1)
        self.absint = cat(self.absint, absint, -1)
        self.extra = cat(self.extra, extra, -1)

    def totals(self):
        # pairwise summation order is fixed by panel order -> reproducible
        return self.kron.sum(-1), self.err.sum(-1), self.absint.sum(-1), self.extra.sum(-1)


def _split_choice(err, tol, mask):
    e = np.max(np.where(mask[:, None], err / tol[:, None], 0.0), axis=0)
    if e.size == 0:
        return np.zeros(0, dtype=bool)
    return e >= 0.25 * e.max()


def _gk_panels(a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    return c[:, None] + h[:, None] * XK[None, :], h


def integrate_kphi(
    integrand: Callable[[ModeCoords], np.ndarray],
    omega: float,
    d: float,
    cfg: QuadConfig | None = None,
    checked: Sequence[int] | None = None,
) -> QuadResult:
    """Integrate ``int_0^kmax dk_par int_0^2pi dphi f(mode)``.

    Parameters
    ----------
    integrand
        Called with a :class:`ModeCoords` of shape ``(M, N)`` (M wavevector
        nodes by N azimuthal nodes); must return an array of shape
        ``(..., M, N)`` (leading axes are independent components) or
        ``(M, N)``.  It may instead return ``(values, magnitudes)``, where
        ``magnitudes`` is a nonnegative proxy of the same shape whose
        integral sets the relative tolerance scale (useful when a component
        vanishes by symmetry and ``|values|`` is pure roundoff).
    omega, d
        Angular frequency (rad/s) and particle height (m); the cutoff is
        ``max(k_par_max_factor / d, 2 k0)``.
    checked
        Indices of the flattened components that must meet the tolerance;
        the others are integrated on the same nodes as diagnostics.
    """
    cfg = cfg or QuadConfig()
    k0 = omega / C_LIGHT
    k_max = max(cfg.k_par_max_factor / d, 2 * k0)
    u_max = math.acosh(k_max / k0)

    def nodes(t, tag):
        prop = tag[:, None] == 0
        kp = np.where(prop, k0 * np.sin(t), k0 * np.cosh(t))
        kz = np.where(prop, k0 * np.cos(t) + 0j, 1j * k0 * np.sinh(t))
        return kp, kz, np.abs(kz)

    state = {"shape": None}

    def evaluate(a, b, tag, n_phi):
        t, h = _gk_panels(a, b)
        kp, kz, jac = nodes(t, tag)
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        mode = mode_coords(omega, kp.reshape(-1, 1), phi[None, :], k_z=kz.reshape(-1, 1))
        out = integrand(mode)
        if isinstance(out, tuple):
            f, g = (np.asarray(v) for v in out)
        else:
            f = np.asarray(out)
            g = np.abs(f)
        state["shape"] = f.shape[:-2]
        f = f.reshape((-1, a.size, 15, n_phi))
        g = g.reshape(f.shape)
        dphi = 2 * np.pi / n_phi
        s_full = f.sum(-1) * dphi * jac
        s_half = f[..., ::2].sum(-1) * (2 * dphi) * jac
        s_abs = g.sum(-1) * dphi * jac
        kron = (s_full * WK).sum(-1) * h
        gauss = (s_full * WG).sum(-1) * h
        err = np.abs(kron - gauss)
        absint = (s_abs * WK).sum(-1) * h
        half = (s_half * WK).sum(-1) * h
        return kron, err, absint, half

    n_phi = cfg.phi_order
    ep = np.linspace(0, np.pi / 2, _INIT_PANELS[0] + 1)
    ee = np.linspace(0, u_max, _INIT_PANELS[1] + 1)
    a0 = np.concatenate([ep[:-1], ee[:-1]])
    b0 = np.concatenate([ep[1:], ee[1:]])
    tag0 = np.repeat([0, 1], _INIT_PANELS)

    panels = _PanelSet()
    panels.replace(None, a0, b0, tag0, *evaluate(a0, b0, tag0, n_phi))
    mask = _checked(panels.kron.shape[0], checked)

    while True:
        total, k_err, abs_int, half = panels.totals()
        tol = _tolerance(abs_int, cfg)
        phi_err = np.abs(total - half)
        k_ok = np.all((k_err <= 0.5 * tol)[mask])
        phi_ok = np.all((phi_err <= 0.5 * tol)[mask])
        if k_ok and phi_ok:
            break
        if not phi_ok and k_ok:
            n_phi *= 2
            if n_phi > _PHI_ORDER_MAX:
                raise QuadratureError("azimuthal resolution limit reached", _shape(total, state), _shape(k_err + phi_err, state))
            a, b, tag = panels.a, panels.b, panels.tag
            panels = _PanelSet()
            panels.replace(None, a, b, tag, *evaluate(a, b, tag, n_phi))
            continue
        split = _split_choice(panels.err, tol, mask)
        if panels.a.size + split.sum() > cfg.max_subdivisions:
            raise QuadratureError(
                f"wavevector quadrature hit max_subdivisions={cfg.max_subdivisions}",
                _shape(total, state),
                _shape(k_err + phi_err, state),
            )
        a, b, tag = panels.a[split], panels.b[split], panels.tag[split]
        mid = 0.5 * (a + b)
        na, nb, ntag = np.concatenate([a, mid]), np.concatenate([mid, b]), np.concatenate([tag, tag])
        panels.replace(~split, na, nb, ntag, *evaluate(na, nb, ntag, n_phi))

    return QuadResult(
        value=_shape(total, state),
        error=_shape(k_err + phi_err, state),
        n_panels=int(panels.a.size),
        phi_order=n_phi,
        info={"abs_integral": _shape(abs_int, state)},
    )


def _shape(arr, state):
    lead = state["shape"]
    return arr.reshape(lead) if lead is not None else arr


def integrate_omega(
    density: Callable[[np.ndarray], np.ndarray],
    window: tuple[float, float],
    cfg: QuadConfig | None = None,
    seeds: Sequence[float] = (),
    checked: Sequence[int] | None = None,
    upper_decay: float | None = None,
    require_tail: bool = False,
) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of ``density`` over ``window``.

    Parameters
    ----------
    density
        Vectorized: called with a 1-D array of frequencies, returns an
        array of shape ``(..., len(omega))``, or a ``(values, magnitudes)``
        pair as for :func:`integrate_kphi`.
    window
        ``(lo, hi)`` integration limits.
    seeds
        Points inside the window (resonances) used as initial breakpoints,
        so that no peak straddles a panel midpoint unseen.
    upper_decay
        Decay scale of the density beyond ``hi`` used by the tail estimate;
        defaults to ``hi`` (power-law-like tail).
    require_tail
        Raise :class:`TailDominatedError` when the estimated contribution
        outside the window exceeds the tolerance.
    """
    cfg = cfg or QuadConfig()
    lo, hi = map(float, window)
    if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
        raise ConfigurationError("window must be finite with hi > lo", "omega_window")
    inner = [float(s) for s in seeds if lo < s < hi]
    # log-spaced base grid: thermal spectra span decades above lo
    base = np.geomspace(lo, hi, 9) if lo > 0 else np.linspace(lo, hi, 9)
    edges = np.unique(np.concatenate([base, inner, [lo, hi]]))
    a0, b0 = edges[:-1], edges[1:]

    state = {"shape": None}

    def evaluate(a, b):
        x, h = _gk_panels(a, b)
        out = density(x.ravel())
        if isinstance(out, tuple):
            f, g = (np.asarray(v) for v in out)
        else:
            f = np.asarray(out)
            g = np.abs(f)
        state["shape"] = f.shape[:-1]
        f = f.reshape((-1, a.size, 15))
        g = g.reshape(f.shape)
        kron = (f * WK).sum(-1) * h
        err = np.abs(kron - (f * WG).sum(-1) * h)
        absint = (g * WK).sum(-1) * h
        return kron, err, absint, np.zeros_like(kron)

    panels = _PanelSet()
    panels.replace(None, a0, b0, np.zeros(a0.size, dtype=int), *evaluate(a0, b0))
    mask = _checked(panels.kron.shape[0], checked)
    while True:
        total, err, abs_int, _ = panels.totals()
        tol = _tolerance(abs_int, cfg)
        if np.all((err <= tol)[mask]):
            break
        split = _split_choice(panels.err, tol, mask)
        if panels.a.size + split.sum() > cfg.max_subdivisions:
            raise QuadratureError(
                f"frequency quadrature hit max_subdivisions={cfg.max_subdivisions}",
                _shape(total, state),
                _shape(err, state),
            )
        a, b = panels.a[split], panels.b[split]
        mid = 0.5 * (a + b)
        na, nb = np.concatenate([a, mid]), np.concatenate([mid, b])
        panels.replace(~split, na, nb, np.zeros(na.size, dtype=int), *evaluate(na, nb))

    ends = density(np.array([lo, hi]))
    ends = np.asarray(ends[0] if isinstance(ends, tuple) else ends).reshape((-1, 2))
    scale_hi = hi if upper_decay is None else upper_decay
    tail = np.abs(ends[:, 1]) * scale_hi + np.abs(ends[:, 0]) * lo
    tol = _tolerance(abs_int, cfg)
    if require_tail and np.any((tail > tol)[mask]):
        raise TailDominatedError(
            f"frequency window {window} misses spectral weight (tail estimate {tail[mask].max():.3e})",
            _shape(total, state),
            _shape(err + tail, state),
        )
    return QuadResult(
        value=_shape(total, state),
        error=_shape(err, state),
        n_panels=int(panels.a.size),
        tail=_shape(tail, state),
        info={"abs_integral": _shape(abs_int, state), "panels": (panels.a.copy(), panels.b.copy())},
    )
