"""Scenario files: plain-text key = value run descriptions.

A scenario fully determines a run including seeds.  Exponent parameters
must be written as rationals ("4/3", "3"); decimal notation is rejected
for them so a boundary case can never be misclassified by parsing.  The
canonical emission (to_text) round-trips through parsing to an identical
scenario, and its hash is embedded in every artifact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from fractions import Fraction

from .besov import BesovParams, as_fraction
from .fields import SpectralField, random_field
from .solver import DEFAULT_CONSTANTS, EmpiricalConstants, SolverConfig
from .stokes import ForcingSpec


class ScenarioError(ValueError):
    """Malformed scenario text; message carries line and field information."""


@dataclass(frozen=True)
class ModeEntry:
    k1: int
    k2: int
    re: float
    im: float
    law: str = "constant"
    frequency: float = 0.0
    phase: float = 0.0

    def to_text(self, with_law: bool) -> str:
        body = f"{self.k1} {self.k2} {self.re!r} {self.im!r}"
        if not with_law:
            return body
        if self.law == "constant":
            return f"{body} constant"
        return f"{body} {self.law} {self.frequency!r} {self.phase!r}"


@dataclass(frozen=True)
class FieldSpec:
    kind: str = "zero"  # zero | modes | random
    modes: tuple = ()
    gamma: float = 2.0
    amplitude: float = 1.0
    seed_offset: int = 0
    band: int | None = None


@dataclass(frozen=True)
class Scenario:
    name: str = "run"
    seed: int = 0
    params: BesovParams = BesovParams(Fraction(4, 3), Fraction(5, 2), Fraction(3), Fraction(3))
    n: int = 32
    dt: float = 1e-3
    t_final: float = 1.0
    split_eps: float = 1e-3
    smallness_y0: float = 1e-2
    smallness_h: float = 1e-2
    initial: FieldSpec = FieldSpec()
    forcing: FieldSpec = FieldSpec()
    snapshot_times: tuple = ()
    reports: tuple = ("trajectory", "report")
    constants: EmpiricalConstants = DEFAULT_CONSTANTS

    # -- construction of run objects ------------------------------------------

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            n=self.n, dt=self.dt, t_final=self.t_final, split_eps=self.split_eps,
            smallness_y0=self.smallness_y0, smallness_h=self.smallness_h,
            constants=self.constants,
        )

    def initial_field(self) -> SpectralField:
        return _build_field(self.initial, self.n, self.seed)

    def forcing_spec(self) -> ForcingSpec:
        spec = self.forcing
        if spec.kind == "zero":
            return ForcingSpec.zero(self.n)
        if spec.kind == "modes":
            return ForcingSpec.from_modes(
                self.n,
                [((m.k1, m.k2), complex(m.re, m.im), m.law, m.frequency, m.phase)
                 for m in spec.modes],
            )
        if spec.kind == "random":
            return ForcingSpec.from_random(self.n, spec.gamma, self.seed + 1 + spec.seed_offset,
                                           amplitude=spec.amplitude, band=spec.band)
        raise ScenarioError(f"unknown forcing kind {spec.kind!r}")

    # -- canonical text form ----------------------------------------------------

    def to_text(self) -> str:
        lines = [
            f"name = {self.name}",
            f"seed = {self.seed}",
            f"params.s = {self.params.s}",
            f"params.p = {self.params.p}",
            f"params.q = {self.params.q}",
            f"params.r = {self.params.r}",
            f"solver.n = {self.n}",
            f"solver.dt = {self.dt!r}",
            f"solver.t_final = {self.t_final!r}",
            f"solver.split_eps = {self.split_eps!r}",
            f"solver.smallness_y0 = {self.smallness_y0!r}",
            f"solver.smallness_h = {self.smallness_h!r}",
        ]
        for key, val in sorted(self.constants.as_dict().items()):
            lines.append(f"constants.{key} = {val!r}")
        lines.extend(_field_spec_lines("initial", self.initial, with_law=False))
        lines.extend(_field_spec_lines("forcing", self.forcing, with_law=True))
        if self.snapshot_times:
            lines.append("snapshot_times = " + " ".join(repr(t) for t in self.snapshot_times))
        lines.append("reports = " + " ".join(self.reports))
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    @classmethod
    def from_text(cls, text: str) -> "Scenario":
        pairs = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if not key or not value:
                raise ScenarioError(f"line {lineno}: empty key or value")
            pairs.append((lineno, key, value))
        if not pairs:
            raise ScenarioError("scenario file is empty")

        data: dict = {}
        modes: dict = {"initial": [], "forcing": []}
        for lineno, key, value in pairs:
            if key in ("initial.mode", "forcing.mode"):
                modes[key.split(".")[0]].append(_parse_mode(lineno, key, value))
            elif key in data:
                raise ScenarioError(f"line {lineno}: duplicate key {key!r}")
            else:
                data[key] = (lineno, value)

        def take(key, default=None, conv=str):
            if key not in data:
                if default is None:
                    raise ScenarioError(f"missing required key {key!r}")
                return default
            lineno, value = data.pop(key)
            try:
                return conv(value)
            except ScenarioError:
                raise
            except Exception as exc:
                raise ScenarioError(f"line {lineno}: field {key!r}: {exc}") from exc

        params = BesovParams(
            take("params.s", conv=as_fraction, default=Fraction(4, 3)),
            take("params.p", conv=as_fraction, default=Fraction(5, 2)),
            take("params.q", conv=as_fraction, default=Fraction(3)),
            take("params.r", conv=as_fraction, default=Fraction(3)),
        )
        constants = DEFAULT_CONSTANTS
        const_kwargs = {}
        for key in list(data):
            if key.startswith("constants."):
                name = key.split(".", 1)[1]
                if name not in DEFAULT_CONSTANTS.as_dict():
                    raise ScenarioError(f"unknown constant {name!r}")
                const_kwargs[name] = float(data.pop(key)[1])
        if const_kwargs:
            constants = replace(DEFAULT_CONSTANTS, **const_kwargs)

        scenario = cls(
            name=take("name", default="run"),
            seed=take("seed", default=0, conv=int),
            params=params,
            n=take("solver.n", default=32, conv=int),
            dt=take("solver.dt", default=1e-3, conv=float),
            t_final=take("solver.t_final", default=1.0, conv=float),
            split_eps=take("solver.split_eps", default=1e-3, conv=float),
            smallness_y0=take("solver.smallness_y0", default=1e-2, conv=float),
            smallness_h=take("solver.smallness_h", default=1e-2, conv=float),
            initial=_field_spec_from(data, "initial", tuple(modes["initial"])),
            forcing=_field_spec_from(data, "forcing", tuple(modes["forcing"])),
            snapshot_times=take(
                "snapshot_times", default=(),
                conv=lambda v: tuple(float(x) for x in v.split()),
            ),
            reports=take(
                "reports", default=("trajectory", "report"),
                conv=lambda v: tuple(v.split()),
            ),
            constants=constants,
        )
        if data:
            key = next(iter(data))
            raise ScenarioError(f"line {data[key][0]}: unknown key {key!r}")
        return scenario


def _parse_mode(lineno: int, key: str, value: str) -> ModeEntry:
    parts = value.split()
    if len(parts) < 4:
        raise ScenarioError(f"line {lineno}: {key} needs 'k1 k2 re im [law ...]'")
    try:
        k1, k2 = int(parts[0]), int(parts[1])
        re, im = float(parts[2]), float(parts[3])
        law = parts[4] if len(parts) > 4 else "constant"
        freq = float(parts[5]) if len(parts) > 5 else 0.0
        phase = float(parts[6]) if len(parts) > 6 else 0.0
    except ValueError as exc:
        raise ScenarioError(f"line {lineno}: {key}: {exc}") from exc
    if law not in ("constant", "sinusoid"):
        raise ScenarioError(f"line {lineno}: {key}: unknown law {law!r}")
    return ModeEntry(k1, k2, re, im, law, freq, phase)


def _field_spec_from(data: dict, prefix: str, modes: tuple) -> FieldSpec:
    def pop(key, default, conv):
        if f"{prefix}.{key}" in data:
            lineno, value = data.pop(f"{prefix}.{key}")
            try:
                return conv(value)
            except Exception as exc:
                raise ScenarioError(f"line {lineno}: field {prefix}.{key}: {exc}") from exc
        return default

    kind = pop("kind", "modes" if modes else "zero", str)
    if kind not in ("zero", "modes", "random"):
        raise ScenarioError(f"unknown {prefix}.kind {kind!r}")
    band = pop("band", None, lambda v: int(v))
    return FieldSpec(
        kind=kind,
        modes=modes,
        gamma=pop("gamma", 2.0, float),
        amplitude=pop("amplitude", 1.0, float),
        seed_offset=pop("seed_offset", 0, int),
        band=band,
    )


def _field_spec_lines(prefix: str, spec: FieldSpec, with_law: bool) -> list:
    lines = [f"{prefix}.kind = {spec.kind}"]
    if spec.kind == "random":
        lines.append(f"{prefix}.gamma = {spec.gamma!r}")
        lines.append(f"{prefix}.amplitude = {spec.amplitude!r}")
        lines.append(f"{prefix}.seed_offset = {spec.seed_offset}")
        if spec.band is not None:
            lines.append(f"{prefix}.band = {spec.band}")
    for m in spec.modes:
        lines.append(f"{prefix}.mode = {m.to_text(with_law)}")
    return lines


def _build_field(spec: FieldSpec, n: int, seed: int) -> SpectralField:
    if spec.kind == "zero":
        return SpectralField.zeros(n)
    if spec.kind == "modes":
        return SpectralField.from_modes(
            n, [((m.k1, m.k2), complex(m.re, m.im)) for m in spec.modes]
        )
    if spec.kind == "random":
        return random_field(n, spec.gamma, seed + spec.seed_offset,
                            band=spec.band, amplitude=spec.amplitude)
    raise ScenarioError(f"unknown field kind {spec.kind!r}")
