"""The Stokes operator, its semigroup, and the nonhomogeneous linear solve.

Everything here is diagonal on the divergence-free basis: A multiplies a
coefficient by |k|^2, the semigroup by exp(-t |k|^2).  The linear solve is
evaluated per mode from the variation-of-constants formula; for constant
and sinusoidal forcing the time integral is closed form, so the linear
layer carries no time-discretization error at all.  Sampled forcing series
are integrated with the piecewise-constant rule, interval by interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResolutionMismatch
from .fields import SpectralField, random_field
from .trajectory import Trajectory


def apply_a(u: SpectralField) -> SpectralField:
    """Au: per-mode multiplication by |k|^2."""
    return u.scale_radial(u.radial_weights(lambda kk: kk.astype(float)))


def apply_inv_a(u: SpectralField) -> SpectralField:
    """A^{-1} u: per-mode division by |k|^2 (bounded, zero mode excluded)."""
    return u.divide_radial(u.radial_weights(lambda kk: kk.astype(float)))


def semigroup(u: SpectralField, t: float) -> SpectralField:
    """exp(-tA) u for t >= 0."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    return u.scale_radial(u.radial_weights(lambda kk: np.exp(-t * kk.astype(float))))


# -- forcing ------------------------------------------------------------------


@dataclass(frozen=True)
class ForcingComponent:
    """A spatial field times a real scalar time law.

    law "constant": m(t) = 1; law "sinusoid": m(t) = cos(frequency t + phase).
    Real time laws preserve the coefficient reality constraint at every t.
    """

    profile: SpectralField
    law: str = "constant"
    frequency: float = 0.0
    phase: float = 0.0

    def modulation(self, t: float) -> float:
        if self.law == "constant":
            return 1.0
        if self.law == "sinusoid":
            return float(np.cos(self.frequency * t + self.phase))
        raise ValueError(f"unknown time law {self.law!r}")

    def duhamel_weight(self, kk: np.ndarray, t: float) -> np.ndarray:
        """int_0^t exp(-(t-tau) |k|^2) m(tau) dtau, per squared wavenumber."""
        lam = kk.astype(float)
        if self.law == "constant":
            return -np.expm1(-t * lam) / lam
        if self.law == "sinusoid":
            z = lam + 1j * self.frequency
            return np.real(
                (np.exp(1j * (self.frequency * t + self.phase)) - np.exp(1j * self.phase - lam * t)) / z
            )
        raise ValueError(f"unknown time law {self.law!r}")


class ForcingSpec:
    """Forcing term assembled from components with closed-form time laws."""

    def __init__(self, n: int, components=()):
        self.n = n
        self.components = tuple(components)
        for comp in self.components:
            if comp.profile.n != n:
                raise ResolutionMismatch("forcing component resolution mismatch")

    @classmethod
    def zero(cls, n: int) -> "ForcingSpec":
        return cls(n, ())

    @classmethod
    def from_modes(cls, n: int, terms) -> "ForcingSpec":
        """terms: iterable of (k, amplitude[, law, frequency, phase]).

        Each term becomes one component whose profile is the single-mode
        field (conjugate partner auto-filled).
        """
        comps = []
        for term in terms:
            k, amp = term[0], term[1]
            law = term[2] if len(term) > 2 else "constant"
            freq = float(term[3]) if len(term) > 3 else 0.0
            phase = float(term[4]) if len(term) > 4 else 0.0
            comps.append(
                ForcingComponent(SpectralField.from_modes(n, [(k, amp)]), law, freq, phase)
            )
        return cls(n, comps)

    @classmethod
    def from_random(cls, n: int, gamma: float, seed: int, amplitude: float = 1.0,
                    band: int | None = None) -> "ForcingSpec":
        """Constant-in-time random forcing with power-law coefficients."""
        return cls(n, (ForcingComponent(random_field(n, gamma, seed, band=band, amplitude=amplitude)),))

    @classmethod
    def from_field(cls, field: SpectralField) -> "ForcingSpec":
        return cls(field.n, (ForcingComponent(field),))

    def is_zero(self) -> bool:
        return all(c.profile.is_zero() for c in self.components)

    def field_at(self, t: float) -> SpectralField:
        out = SpectralField.zeros(self.n)
        for comp in self.components:
            out = out + comp.profile * comp.modulation(t)
        return out

    def split(self, k_cut: int) -> tuple["ForcingSpec", "ForcingSpec"]:
        """Low-pass part (modes |k| <= k_cut) and the remainder."""
        low, high = [], []
        for comp in self.components:
            low.append(ForcingComponent(comp.profile.low_pass(k_cut), comp.law, comp.frequency, comp.phase))
            high.append(ForcingComponent(comp.profile - comp.profile.low_pass(k_cut),
                                         comp.law, comp.frequency, comp.phase))
        return ForcingSpec(self.n, low), ForcingSpec(self.n, high)

    def duhamel_term(self, t: float) -> SpectralField:
        """int_0^t exp(-(t-tau)A) f(tau) dtau in closed form."""
        out = SpectralField.zeros(self.n)
        for comp in self.components:
            w = comp.profile.radial_weights(lambda kk: comp.duhamel_weight(kk, t))
            out = out + comp.profile.scale_radial(w)
        return out


class SampledForcing:
    """Forcing known only at uniform sample times, held piecewise constant.

    On [t_i, t_{i+1}) the forcing is fields[i]; field_at(t) follows the same
    left-continuous convention.
    """

    def __init__(self, times, fields):
        self.times = np.asarray(times, dtype=float)
        self.fields = list(fields)
        if self.times.size != len(self.fields):
            raise ValueError("times and fields must align")
        self.n = self.fields[0].n

    def field_at(self, t: float) -> SpectralField:
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        return self.fields[max(0, min(i, len(self.fields) - 1))]


def stokes_solve(u0: SpectralField, forcing, t_final: float, steps: int) -> Trajectory:
    """Solve u' + Au = f, u(0) = u0 on [0, t_final] per mode.

    Closed-form Duhamel for ForcingSpec laws; the piecewise-constant rule
    (each interval integrated exactly) for SampledForcing.  Derivative
    samples are taken from the equation, u' = f - Au.
    """
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    if forcing is None:
        forcing = ForcingSpec.zero(u0.n)
    if forcing.n != u0.n:
        raise ResolutionMismatch("forcing resolution differs from initial data")
    times = np.linspace(0.0, t_final, steps + 1)
    fields = []
    if isinstance(forcing, SampledForcing):
        if forcing.times.size != times.size or not np.allclose(forcing.times, times):
            raise ResolutionMismatch("sampled forcing grid must match the solve grid")
        dt = t_final / steps
        u = u0
        fields.append(u)
        decay = u0.radial_weights(lambda kk: np.exp(-dt * kk.astype(float)))
        gain = u0.radial_weights(lambda kk: -np.expm1(-dt * kk.astype(float)) / kk.astype(float))
        for i in range(steps):
            u = u.scale_radial(decay) + forcing.fields[i].scale_radial(gain)
            fields.append(u)
    else:
        for t in times:
            fields.append(semigroup(u0, float(t)) + forcing.duhamel_term(float(t)))
    derivs = [forcing.field_at(float(t)) - apply_a(u) for t, u in zip(times, fields)]
    return Trajectory(times, fields, derivs=derivs)


def stokes_energy_residual(u0: SpectralField, t1: float, t2: float) -> float:
    """Residual of 1/2||u(t2)||^2 - 1/2||u(t1)||^2 + int_{t1}^{t2} ||u||^2_{H1} for f = 0.

    The viscous integral is closed form per mode, so the residual is pure
    floating-point noise.
    """
    amp2 = 2.0 * np.abs(u0.c) ** 2  # canonical half carries both +/-k
    kk = u0.radial_weights(lambda k: k.astype(float))
    e1 = np.exp(-2.0 * t1 * kk)
    e2 = np.exp(-2.0 * t2 * kk)
    half_diff = 0.5 * float(np.sum(amp2 * e2) - np.sum(amp2 * e1))
    integral = 0.5 * float(np.sum(amp2 * (e1 - e2)))
    return half_diff + integral


@dataclass(frozen=True)
class LinearRegularityReport:
    """Empirical continuity constants of the linear solve.

    ratio is ||u||_W over the data norm; continuity_ratio is the sup-in-time norm
    of u in the initial-data space against ||u||_W.
    """

    w_norm: float
    data_norm: float
    ratio: float
    sup_initial_space: float
    continuity_ratio: float


def linear_regularity_report(traj: Trajectory, forcing, u0: SpectralField, params,
                             m: int | None = None) -> LinearRegularityReport:
    from .besov import besov_value  # local import to avoid cycle at module load

    r = float(params.r)
    f_vals = np.array(
        [besov_value(forcing.field_at(float(t)), -params.s, params.p, params.q, m) for t in traj.times]
    )
    f_norm = traj.lr_time_norm(f_vals, r)
    u0_norm = besov_value(u0, params.initial_regularity, params.p, params.r, m)
    data_norm = f_norm + u0_norm
    w_norm = traj.w1r_norm(params, m)
    sup_init = traj.sup_time(
        traj.besov_series(params.initial_regularity, params.p, params.r, m)
    )
    return LinearRegularityReport(
        w_norm=w_norm,
        data_norm=data_norm,
        ratio=w_norm / data_norm if data_norm > 0 else 0.0,
        sup_initial_space=sup_init,
        continuity_ratio=sup_init / w_norm if w_norm > 0 else 0.0,
    )
