"""Time series of spectral fields with discrete-in-time norms.

Time integrals (the L^r-in-time norms) use the composite trapezoid rule on
the sample grid; sup-in-time norms take the max over samples.  A trajectory
may carry the integrator's internal stage states so that a coupled equation
can be driven by exactly the stage values a joint integration would use,
and named accumulators integrated alongside the state by the same scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .besov import besov_value
from .fields import SpectralField


@dataclass
class Trajectory:
    times: np.ndarray
    fields: list
    derivs: list | None = None
    stages: list | None = None  # per step (S2, S3, S4) stage states
    acc: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.fields) != self.times.size:
            raise ValueError("times and fields must align")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")

    @property
    def n(self) -> int:
        return self.fields[0].n

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def series(self, fn) -> np.ndarray:
        return np.array([fn(u) for u in self.fields], dtype=float)

    def besov_series(self, s, p, q, m: int | None = None) -> np.ndarray:
        return self.series(lambda u: besov_value(u, s, p, q, m))

    def deriv_besov_series(self, s, p, q, m: int | None = None) -> np.ndarray:
        if self.derivs is None:
            raise ValueError("trajectory carries no derivative samples")
        return np.array([besov_value(d, s, p, q, m) for d in self.derivs], dtype=float)

    def lr_time_norm(self, values: np.ndarray, r) -> float:
        rf = float(r)
        return float(np.trapezoid(np.asarray(values, dtype=float) ** rf, self.times) ** (1.0 / rf))

    def sup_time(self, values: np.ndarray) -> float:
        return float(np.max(values))

    def w1r_norm(self, params, m: int | None = None) -> float:
        """Discrete graph norm: (int ||u||^r_{B^{-s+2}_{p,q}} + int ||u'||^r_{B^{-s}_{p,q}})^(1/r)."""
        if self.derivs is None:
            raise ValueError("w1r norm needs derivative samples")
        r = float(params.r)
        a = self.besov_series(-params.s + 2, params.p, params.q, m) ** r
        b = self.deriv_besov_series(-params.s, params.p, params.q, m) ** r
        return float(np.trapezoid(a + b, self.times) ** (1.0 / r))

    def field_at_index(self, i: int) -> SpectralField:
        return self.fields[i]

    def restricted(self, upto_index: int) -> "Trajectory":
        """Prefix of the trajectory on [0, times[upto_index]]."""
        return Trajectory(
            self.times[: upto_index + 1],
            self.fields[: upto_index + 1],
            None if self.derivs is None else self.derivs[: upto_index + 1],
            None if self.stages is None else self.stages[:upto_index],
            {k: v[: upto_index + 1] for k, v in self.acc.items()},
        )

    def to_csv(self, path, besov_specs=(), extra_columns=None, meta: dict | None = None) -> None:
        """Write (t, L2, H1, configured Besov norms, accumulators, extras) as CSV.

        Floats are written with 17 significant digits so identical runs give
        byte-identical artifacts.
        """
        cols = {"t": self.times,
                "l2": self.series(lambda u: u.l2_norm()),
                "h1": self.series(lambda u: u.h_norm(1.0))}
        for spec in besov_specs:
            s, p, q = spec
            cols[f"besov_{s}_{p}_{q}"] = self.besov_series(s, p, q)
        for name, arr in self.acc.items():
            cols[f"acc_{name}"] = arr
        if extra_columns:
            cols.update(extra_columns)
        names = list(cols)
        lines = []
        if meta:
            for key in sorted(meta):
                lines.append(f"# {key} = {meta[key]}")
        lines.append(",".join(names))
        data = np.column_stack([np.asarray(cols[c], dtype=float) for c in names])
        for row in data:
            lines.append(",".join(f"{v:.17g}" for v in row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
