"""Rotational dynamics of a levitated particle about the x axis.

The spin obeys the Langevin equation

    I dOmega = (M - gamma Omega) dt + sqrt(2 gamma k_B T_e) dW

with gas damping ``gamma``.  It is integrated by Euler-Maruyama, vectorized
over an ensemble.  Each trajectory draws from its own PCG64 stream spawned
from ``numpy.random.SeedSequence(seed)``, so results are reproducible and
independent of the ensemble size used for the other trajectories.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.constants import k as K_B
from scipy.constants import torr

from .errors import ConfigurationError, StabilityError, UnboundedSpinError
from .materials import ParticleSpec

__all__ = [
    "G_STANDARD",
    "GasEnvironment",
    "RotorState",
    "damping_coefficient",
    "gravity_weight",
    "moment_of_inertia",
    "simulate_langevin",
    "steady_state_omega",
    "write_summary_json",
    "write_trajectories_csv",
]

G_STANDARD = 9.81  # m/s^2
DAMPING_CONSTANT = 11.976
DEFAULT_GAS_MASS = 4.8e-26  # kg


@dataclass(frozen=True)
class GasEnvironment:
    """Residual gas: pressure (Pa), molecular mass (kg), temperature (K)."""

    pressure: float
    gas_mass: float = DEFAULT_GAS_MASS
    temperature: float = 300.0

    def __post_init__(self):
        if not (self.pressure >= 0):
            raise ConfigurationError("must be >= 0", "gas.pressure")
        if not (self.gas_mass > 0):
            raise ConfigurationError("must be > 0", "gas.gas_mass")
        if not (self.temperature > 0):
            raise ConfigurationError("must be > 0", "gas.temperature")

    @classmethod
    def from_torr(cls, pressure_torr, gas_mass=DEFAULT_GAS_MASS, temperature=300.0):
        return cls(pressure_torr * torr, gas_mass, temperature)


def damping_coefficient(R: float, gas: GasEnvironment) -> float:
    """Rotational gas damping ``p pi (2R)^4 / 11.976 * sqrt(2 m / k_B T)`` (N m s)."""
    if not (R > 0):
        raise ConfigurationError("must be > 0", "radius")
    return gas.pressure * np.pi * (2 * R) ** 4 / DAMPING_CONSTANT * np.sqrt(2 * gas.gas_mass / (K_B * gas.temperature))


def moment_of_inertia(spec: ParticleSpec) -> float:
    """``(2/5) m R^2`` of a homogeneous sphere (kg m^2)."""
    return 0.4 * spec.mass * spec.radius**2


def gravity_weight(spec: ParticleSpec) -> float:
    """Weight ``(4/3) pi R^3 rho g`` with standard gravity (N)."""
    return spec.mass * G_STANDARD


def steady_state_omega(M_x, gamma):
    """Terminal spin ``M_x / gamma`` (rad/s)."""
    if gamma == 0:
        raise UnboundedSpinError("zero rotational damping: the spin grows without bound")
    if gamma < 0:
        raise ConfigurationError("must be > 0", "gamma")
    return M_x / gamma


@dataclass
class RotorState:
    """Ensemble statistics of the spin.

    ``mean``/``variance`` are over trajectories at the final time;
    ``stationary_mean``/``stationary_variance`` pool all samples after the
    burn-in (time-averaged, which reduces the estimator noise).
    """

    time: float
    mean: float
    variance: float
    stationary_mean: float
    stationary_variance: float
    n_trajectories: int
    steps: int
    dt: float
    burn_in_steps: int
    mean_std_error: float
    relaxation_time: float
    final_omega: np.ndarray | None = None
    trajectories: np.ndarray | None = None

    def summary(self):
        d = asdict(self)
        d.pop("final_omega")
        d.pop("trajectories")
        return {k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in d.items()}


def _rngs(seed, n):
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(s)) for s in children]


def simulate_langevin(
    torque: float | Callable[[np.ndarray], np.ndarray],
    I: float,
    gamma: float,
    T_e: float,
    dt: float,
    steps: int,
    n_trajectories: int,
    rng_seed: int,
    omega0: float | np.ndarray = 0.0,
    burn_in: int | None = None,
    record_every: int = 0,
) -> RotorState:
    """Euler-Maruyama ensemble for the spin about x.

    Parameters
    ----------
    torque
        Constant torque (N m) or a callable of the spin array returning the
        torque on each trajectory (e.g. an interpolant of the rotating-frame
        torque).
    I, gamma
        Moment of inertia (kg m^2) and damping (N m s).
    T_e
        Gas / environment temperature setting the noise strength (K).
    dt, steps
        Time step (s) and number of steps.  ``dt`` must not exceed
        ``I / gamma / 100``.
    n_trajectories, rng_seed
        Ensemble size and master seed.
    burn_in
        Steps discarded before pooling stationary statistics; defaults to
        ``steps // 2``.
    record_every
        If > 0, keep every n-th state of every trajectory in
        ``RotorState.trajectories`` (shape ``(n_trajectories, n_records)``).
    """
    if not (I > 0):
        raise ConfigurationError("must be > 0", "I")
    if not (gamma > 0):
        raise ConfigurationError("must be > 0", "gamma")
    if not (dt > 0) or steps < 1 or n_trajectories < 1:
        raise ConfigurationError("dt, steps and n_trajectories must be positive", "dynamics")
    tau = I / gamma
    if dt > tau / 100:
        raise StabilityError(f"dt={dt:.3e} s exceeds I/gamma/100 = {tau / 100:.3e} s")
    burn_in = steps // 2 if burn_in is None else int(burn_in)
    if not 0 <= burn_in < steps:
        raise ConfigurationError("burn_in must be in [0, steps)", "burn_in")

    rngs = _rngs(rng_seed, n_trajectories)
    omega = np.broadcast_to(np.asarray(omega0, dtype=float), (n_trajectories,)).copy()
    torque_fn = torque if callable(torque) else (lambda om, m=float(torque): np.full_like(om, m))
    noise = np.sqrt(2 * gamma * K_B * T_e) / I * np.sqrt(dt)
    decay = gamma / I * dt

    n_rec = steps // record_every + 1 if record_every else 0
    rec = np.empty((n_trajectories, n_rec)) if record_every else None
    if record_every:
        rec[:, 0] = omega
    acc = np.zeros(n_trajectories)
    acc2 = np.zeros(n_trajectories)
    n_acc = 0
    # noise for a block of steps per trajectory, drawn per-trajectory stream
    block = 4096
    for start in range(0, steps, block):
        nb = min(block, steps - start)
        dw = np.stack([g.standard_normal(nb) for g in rngs])
        for j in range(nb):
            omega = omega + torque_fn(omega) / I * dt - decay * omega + noise * dw[:, j]
            step = start + j + 1
            if step > burn_in:
                acc += omega
                acc2 += omega * omega
                n_acc += 1
            if record_every and step % record_every == 0:
                rec[:, step // record_every] = omega
    st_mean = acc.sum() / (n_acc * n_trajectories)
    st_var = acc2.sum() / (n_acc * n_trajectories) - st_mean**2
    # traj means are correlated in time; use the ensemble spread of the per-trajectory averages
    per_traj = acc / n_acc
    sem = per_traj.std(ddof=1) / np.sqrt(n_trajectories) if n_trajectories > 1 else float("nan")
    return RotorState(
        time=steps * dt,
        mean=float(omega.mean()),
        variance=float(omega.var(ddof=1)) if n_trajectories > 1 else 0.0,
        stationary_mean=float(st_mean),
        stationary_variance=float(max(st_var, 0.0)),
        n_trajectories=n_trajectories,
        steps=steps,
        dt=dt,
        burn_in_steps=burn_in,
        mean_std_error=float(sem),
        relaxation_time=tau,
        final_omega=omega,
        trajectories=rec,
    )


def write_trajectories_csv(state: RotorState, path_pattern: str, record_every: int):
    """One CSV per trajectory with columns ``time_s, omega_rad_s``.

    ``path_pattern`` is formatted with the trajectory index.
    """
    if state.trajectories is None:
        raise ConfigurationError("trajectories were not recorded", "record_every")
    times = np.arange(state.trajectories.shape[1]) * record_every * state.dt
    paths = []
    for i, row in enumerate(state.trajectories):
        path = str(path_pattern).format(i)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "omega_rad_s"])
            for t, om in zip(times, row):
                w.writerow([repr(float(t)), repr(float(om))])
        paths.append(path)
    return paths


def write_summary_json(state: RotorState, path, I=None, T_e=None, extra=None):
    """Ensemble summary (means, variances, stationarity diagnostics) as JSON.

    With ``I`` and ``T_e`` the equipartition ratio ``I <Omega^2> / k_B T_e``
    of the stationary samples is included.
    """
    doc = state.summary()
    if I is not None and T_e:
        second = state.stationary_variance + state.stationary_mean**2
        doc["equipartition_ratio"] = float(I * state.stationary_variance / (K_B * T_e))
        doc["mean_rotational_energy_J"] = float(0.5 * I * second)
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
