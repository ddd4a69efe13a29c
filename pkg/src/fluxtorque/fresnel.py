"""Plane-wave reflection at the vacuum / gyrotropic-substrate interface.

Geometry: vacuum for z > 0, substrate for z < 0.  A plane-wave channel is
``(omega, k_par, phi)`` with in-plane wavevector ``k_par (cos phi, sin phi)``
and ``k_z = sqrt(k0^2 - k_par^2)`` on the branch ``Im k_z >= 0``.

The polarization basis is fixed here and re-exported everywhere else:

    e_s       = ( sin phi, -cos phi, 0)
    e_p(+/-)  = -(1/k0) (+/- k_z cos phi, +/- k_z sin phi, -k_par)

for waves travelling along +/- z.  ``r_jk`` is the amplitude of the
j-polarized upgoing wave produced by a unit k-polarized downgoing wave,
so a perfect conductor has ``r_ss = -1``, ``r_pp = +1``.

Internally every solve happens in a frame rotated about z so that the
in-plane wavevector lies along x'.  In that frame ``e_s = (0, -1, 0)`` and
``e_p(+/-) = (-/+ k_z, 0, k_par) / k0``.  Fields are normalized as
``H~ = Z0 H`` and lengths by ``1/k0`` so Maxwell's equations read
``K x E = H~`` and ``K x H~ = -eps E - i j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT

from .errors import BoundarySolveError, DegenerateModeError
from .materials import GyrotropicModel, HydrodynamicModel, epsilon_substrate

__all__ = [
    "ModeCoords",
    "ReflectionMatrix",
    "mode_coords",
    "polarization_vectors",
    "reflect",
    "reflect_local",
    "reflect_nonlocal",
    "reflect_tensor",
]

# separation of selected bulk roots (in units of k0) below which the mode
# basis is checked for rank deficiency
_DEGENERACY_TOL = 1e-10
_RESIDUAL_TOL = 1e-10
# eigenvalue spread above which the selected roots are Newton-polished
_POLISH_SPREAD = 1e4


def _kz_branch(k0, k_par):
    kz = np.sqrt((k0 - k_par) * (k0 + k_par) + 0j)
    return np.where(kz.imag < 0, -kz, kz)


@dataclass(frozen=True)
class ModeCoords:
    """One plane-wave channel, or a broadcast array of them."""

    omega: np.ndarray
    k_par: np.ndarray
    phi: np.ndarray
    k0: np.ndarray
    k_z: np.ndarray

    @property
    def shape(self):
        return np.shape(self.k_z)


def mode_coords(omega, k_par, phi, k_z=None) -> ModeCoords:
    """Build :class:`ModeCoords`; arguments broadcast against each other.

    ``k_z`` may be supplied by callers that know it more accurately than
    ``sqrt(k0^2 - k_par^2)`` (e.g. quadrature nodes parametrized near the
    light line); it must lie on the ``Im k_z >= 0`` branch.
    """
    omega, k_par, phi = np.broadcast_arrays(
        np.asarray(omega, dtype=float), np.asarray(k_par, dtype=float), np.asarray(phi, dtype=float)
    )
    if np.any(~(omega > 0)):
        raise ValueError("omega must be > 0")
    if np.any(k_par < 0):
        raise ValueError("k_par must be >= 0")
    k0 = omega / C_LIGHT
    if k_z is None:
        k_z = _kz_branch(k0, k_par)
    else:
        k_z = np.broadcast_to(np.asarray(k_z, dtype=complex), k0.shape)
    return ModeCoords(omega, k_par, np.mod(phi, 2 * np.pi), k0, k_z)


def polarization_vectors(mode: ModeCoords):
    """Lab-frame ``(e_s, e_p_plus, e_p_minus)``, each of shape ``mode.shape + (3,)``."""
    c, s = np.cos(mode.phi), np.sin(mode.phi)
    kz, k0, kp = mode.k_z, mode.k0, mode.k_par
    zero = np.zeros_like(c)
    e_s = np.stack([s, -c, zero], axis=-1).astype(complex)
    e_pp = np.stack([-kz * c / k0, -kz * s / k0, kp / k0 + 0j], axis=-1)
    e_pm = np.stack([kz * c / k0, kz * s / k0, kp / k0 + 0j], axis=-1)
    return e_s, e_pp, e_pm


@dataclass(frozen=True)
class ReflectionMatrix:
    """The four Fresnel amplitudes (scalars or arrays of ``mode.shape``)."""

    r_ss: np.ndarray
    r_sp: np.ndarray
    r_ps: np.ndarray
    r_pp: np.ndarray

    def as_matrix(self):
        """``[[r_ss, r_sp], [r_ps, r_pp]]`` (rows: reflected pol., columns: incident pol.)."""
        return np.stack(
            [np.stack([self.r_ss, self.r_sp], axis=-1), np.stack([self.r_ps, self.r_pp], axis=-1)], axis=-2
        )

    @classmethod
    def zeros(cls, shape=()):
        z = np.zeros(shape, dtype=complex)
        return cls(z, z, z, z)

    @classmethod
    def perfect_mirror(cls, shape=()):
        one = np.ones(shape, dtype=complex)
        return cls(-one, 0 * one, 0 * one, one)


def _rotation(phi):
    c, s = np.cos(phi), np.sin(phi)
    R = np.zeros(np.shape(phi) + (3, 3))
    R[..., 0, 0], R[..., 0, 1] = c, s
    R[..., 1, 0], R[..., 1, 1] = -s, c
    R[..., 2, 2] = 1.0
    return R


def _vacuum_columns(n0):
    """Tangential (Ex, Ey, Hx, Hy) of the four vacuum waves in the rotated frame."""
    one = np.ones_like(n0)
    zero = np.zeros_like(n0)
    inc_s = np.stack([zero, -one, -n0, zero], axis=-1)
    inc_p = np.stack([n0, zero, zero, -one], axis=-1)
    ref_s = np.stack([zero, -one, n0, zero], axis=-1)
    ref_p = np.stack([-n0, zero, zero, -one], axis=-1)
    return inc_s, inc_p, ref_s, ref_p


def _select_downward(n, vecs, count, mode):
    """Pick the ``count`` eigenmodes that decay (or carry flux) towards z -> -inf."""
    ex, ey, hx, hy = vecs[..., 0, :], vecs[..., 1, :], vecs[..., 2, :], vecs[..., 3, :]
    sz = np.real(ex * np.conj(hy) - ey * np.conj(hx))
    tol = 1e-9 * np.maximum(1.0, np.abs(n))
    key = np.where(np.abs(n.imag) > tol, n.imag, -0.5 * tol * np.sign(-sz + 0.0))
    order = np.argsort(key, axis=-1)[..., :count]
    n_sel = np.take_along_axis(n, order, axis=-1)
    v_sel = np.take_along_axis(vecs, order[..., None, :], axis=-1)
    if count >= 2:
        _check_degenerate(n_sel, v_sel, mode)
    return n_sel, v_sel


def _check_degenerate(n_sel, v_sel, mode):
    m = n_sel.shape[-1]
    # row equilibration keeps the rank but stops large current components
    # from masking independent field components
    rows = np.max(np.abs(v_sel), axis=-1, keepdims=True)
    v_sel = v_sel / np.where(rows > 0, rows, 1.0)
    for i in range(m):
        for j in range(i + 1, m):
            close = np.abs(n_sel[..., i] - n_sel[..., j]) < _DEGENERACY_TOL
            if not np.any(close):
                continue
            vi, vj = v_sel[..., :, i], v_sel[..., :, j]
            overlap = np.abs(np.sum(np.conj(vi) * vj, axis=-1)) / (
                np.linalg.norm(vi, axis=-1) * np.linalg.norm(vj, axis=-1)
            )
            bad = close & (overlap > 1 - 1e-8)
            if np.any(bad):
                idx = np.unravel_index(np.argmax(bad), bad.shape)
                pick = lambda a: np.broadcast_to(a, bad.shape)[idx].item()  # noqa: E731
                raise DegenerateModeError(
                    "coincident bulk eigenmodes", pick(mode.omega), pick(mode.k_par), pick(mode.phi)
                )


def _polish(D, n_sel, v_sel, iterations=3):
    """Newton refinement of selected eigenpairs of ``D``.

    A longitudinal root of size ~c/beta inflates the normwise backward error
    of the dense eigensolver; the componentwise residual used here is not
    affected, so a few Newton steps restore the small roots to full accuracy.
    """
    m = D.shape[-1]
    eye = np.eye(m)
    for j in range(n_sel.shape[-1]):
        lam = n_sel[..., j].copy()
        v = v_sel[..., :, j].copy()
        k = np.argmax(np.abs(v), axis=-1)
        v = v / np.take_along_axis(v, k[..., None], axis=-1)
        ek = eye[k]
        for _ in range(iterations):
            res = np.einsum("...ij,...j->...i", D, v) - lam[..., None] * v
            J = np.zeros(D.shape[:-2] + (m + 1, m + 1), dtype=complex)
            J[..., :m, :m] = D - lam[..., None, None] * eye
            J[..., :m, m] = -v
            J[..., m, :m] = ek
            rhs = np.concatenate([-res, np.zeros(res.shape[:-1] + (1,))], axis=-1)
            try:
                step = np.linalg.solve(J, rhs[..., None])[..., 0]
            except np.linalg.LinAlgError:
                break
            v = v + step[..., :m]
            lam = lam + step[..., m]
        n_sel[..., j] = lam
        v_sel[..., :, j] = v
    return n_sel, v_sel


def _solve_boundary(A, B):
    try:
        X = np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise BoundarySolveError("singular interface boundary system") from exc
    res = np.linalg.norm(A @ X - B, axis=(-2, -1))
    scale = np.linalg.norm(A, axis=(-2, -1)) * np.linalg.norm(X, axis=(-2, -1)) + np.linalg.norm(B, axis=(-2, -1))
    rel = res / scale
    if not np.all(rel < _RESIDUAL_TOL):
        raise BoundarySolveError(f"boundary residual {np.nanmax(rel):.3e} exceeds {_RESIDUAL_TOL}")
    return X


def _assemble(X):
    return ReflectionMatrix(r_ss=X[..., 0, 0], r_ps=X[..., 1, 0], r_sp=X[..., 0, 1], r_pp=X[..., 1, 1])


def reflect_tensor(eps, mode: ModeCoords) -> ReflectionMatrix:
    """Reflection matrix of a local, possibly anisotropic half-space.

    ``eps`` is a lab-frame permittivity tensor broadcastable to
    ``mode.shape + (3, 3)``.  The bulk dispersion quartic is solved as the
    eigenvalue problem of the 4x4 first-order system for the tangential
    fields (Ex, Ey, Hx, Hy).
    """
    R = _rotation(mode.phi)
    e = R @ np.asarray(eps, dtype=complex) @ np.swapaxes(R, -1, -2)
    a = (mode.k_par / mode.k0).astype(complex)
    n0 = mode.k_z / mode.k0

    exx, exy, exz = e[..., 0, 0], e[..., 0, 1], e[..., 0, 2]
    eyx, eyy, eyz = e[..., 1, 0], e[..., 1, 1], e[..., 1, 2]
    ezx, ezy, ezz = e[..., 2, 0], e[..., 2, 1], e[..., 2, 2]
    # Ez = cx Ex + cy Ey + ch Hy from the z-component of K x H = -eps E
    cx, cy, ch = -ezx / ezz, -ezy / ezz, -a / ezz

    D = np.zeros(np.shape(a) + (4, 4), dtype=complex)
    D[..., 0, 0], D[..., 0, 1], D[..., 0, 3] = a * cx, a * cy, 1 + a * ch
    D[..., 1, 2] = -1
    D[..., 2, 0], D[..., 2, 1], D[..., 2, 3] = -eyx - eyz * cx, a * a - eyy - eyz * cy, -eyz * ch
    D[..., 3, 0], D[..., 3, 1], D[..., 3, 3] = exx + exz * cx, exy + exz * cy, exz * ch

    n, vecs = np.linalg.eig(D)
    _, v = _select_downward(n, vecs, 2, mode)

    inc_s, inc_p, ref_s, ref_p = _vacuum_columns(n0)
    A = np.concatenate([ref_s[..., :, None], ref_p[..., :, None], -v], axis=-1)
    B = -np.stack([inc_s, inc_p], axis=-1)
    return _assemble(_solve_boundary(A, B))


def reflect_local(model: GyrotropicModel, mode: ModeCoords) -> ReflectionMatrix:
    """Reflection matrix of the local magneto-optical substrate."""
    eps = epsilon_substrate(model, mode.omega)
    return reflect_tensor(eps, mode)


def _nonlocal_system(a, eps_b, M0, w2, s):
    """6x6 first-order system for (Ex, Ey, Hx, Hy, jz, P/s).

    ``j = J / (eps0 omega)`` is the normalized free-carrier current and
    ``P = i s^2 (K . j)`` the hydrodynamic pressure term, ``s = beta / c``.
    The linear map is applied to the identity to obtain the matrix columns.
    """
    shape = np.shape(a)
    psi = np.broadcast_to(np.eye(6, dtype=complex), shape + (6, 6))
    ex, ey, hx, hy, jz, p = (psi[..., i, :] for i in range(6))
    a_, eb, w2_ = a[..., None], eps_b[..., None], w2[..., None]
    m = lambda i, j: M0[..., i, j][..., None]  # noqa: E731

    ez = -(a_ * hy + 1j * jz) / eb
    rx = w2_ * ex - a_ * s * p - m(0, 2) * jz
    ry = w2_ * ey - m(1, 2) * jz
    det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)
    jx = (m(1, 1) * rx - m(0, 1) * ry) / det
    jy = (m(0, 0) * ry - m(1, 0) * rx) / det

    rows = [
        hy + a_ * ez,
        -hx,
        (a_ * a_ - eb) * ey - 1j * jy,
        eb * ex + 1j * jx,
        -1j * p / s - a_ * jx,
        (w2_ * ez - (m(2, 0) * jx + m(2, 1) * jy + m(2, 2) * jz)) / s,
    ]
    return np.stack(rows, axis=-2)


def reflect_nonlocal(model: HydrodynamicModel, mode: ModeCoords) -> ReflectionMatrix:
    """Reflection matrix of the hydrodynamic magnetoplasma substrate.

    A third (longitudinal) bulk mode is admitted and the extra boundary
    condition is a vanishing normal free-carrier current at the surface.
    ``beta == 0`` falls back to :func:`reflect_local`.
    """
    if getattr(model, "beta", 0.0) == 0.0 or model.plasma_freq == 0.0:
        return reflect_local(model, mode)
    omega = mode.omega
    R = _rotation(mode.phi)
    b_rot = R @ np.asarray(model.b_direction)
    g = model.drude_damping / omega - 1j
    cw = model.cyclotron_freq / omega
    cross = np.zeros(np.shape(b_rot)[:-1] + (3, 3))
    bx, by, bz = b_rot[..., 0], b_rot[..., 1], b_rot[..., 2]
    cross[..., 0, 1], cross[..., 0, 2] = -bz, by
    cross[..., 1, 0], cross[..., 1, 2] = bz, -bx
    cross[..., 2, 0], cross[..., 2, 1] = -by, bx
    M0 = g[..., None, None] * np.eye(3) - cw[..., None, None] * cross

    a = (mode.k_par / mode.k0).astype(complex)
    eps_b = np.broadcast_to(model.bound_permittivity(omega), a.shape)
    w2 = np.broadcast_to((model.plasma_freq / omega) ** 2 + 0j, a.shape)
    D = _nonlocal_system(a, eps_b, M0, w2, model.beta / C_LIGHT)

    n, vecs = np.linalg.eig(D)
    n_sel, v = _select_downward(n, vecs, 3, mode)
    if n.size and np.max(np.abs(n)) > _POLISH_SPREAD * np.min(np.abs(n_sel)):
        _, v = _polish(D, n_sel.copy(), v.copy())

    n0 = mode.k_z / mode.k0
    inc_s, inc_p, ref_s, ref_p = _vacuum_columns(n0)
    pad = lambda col: np.concatenate([col, np.zeros_like(col[..., :1])], axis=-1)  # noqa: E731
    A = np.concatenate([pad(ref_s)[..., :, None], pad(ref_p)[..., :, None], -v[..., :5, :]], axis=-1)
    B = -np.stack([pad(inc_s), pad(inc_p)], axis=-1)
    return _assemble(_solve_boundary(A, B))


def reflect(model: GyrotropicModel, mode: ModeCoords) -> ReflectionMatrix:
    """Dispatch on the model type: hydrodynamic models use the nonlocal solve."""
    if isinstance(model, HydrodynamicModel):
        return reflect_nonlocal(model, mode)
    return reflect_local(model, mode)

