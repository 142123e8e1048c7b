"""Truncated divergence-free vector fields on the 2-torus.

A field is stored by its coefficients on the orthonormal divergence-free
basis

    e_k(xi) = (k_perp / (2*pi*|k|)) * exp(i k.xi),   k_perp = (-k2, k1),

over the nonzero integer modes k with |k|_inf <= N/2.  Real-valued fields
satisfy conj(u_k) = -u_{-k}, so only a canonical half of the lattice is
stored (k1 > 0, or k1 == 0 and k2 > 0); the partner coefficient is implied
and the reality constraint cannot be violated by construction.

Basis normalization is fixed here once: the velocity Fourier coefficient
(of exp(i k.xi)) belonging to u_k is u_k * k_perp / (2*pi*|k|), and every
norm in the package depends on that convention.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InconsistentConjugatePair, ResolutionMismatch, ZeroMode

TWO_PI = 2.0 * np.pi

SNAPSHOT_MAGIC = b"BNSF"
SNAPSHOT_VERSION = 1


@lru_cache(maxsize=None)
def _lattice(n: int):
    """Cached index arrays for the canonical half-lattice at resolution n.

    Layout: row i holds k1 = i (0..n/2), column j holds k2 = j - n/2.
    Slots with k1 == 0 and k2 <= 0 are structurally unused.
    """
    if n <= 0 or n % 2:
        raise ResolutionMismatch(f"resolution must be an even positive integer, got {n}")
    half = n // 2
    k1 = np.arange(0, half + 1)[:, None] * np.ones(n + 1, dtype=int)[None, :]
    k2 = np.arange(-half, half + 1)[None, :] * np.ones(half + 1, dtype=int)[:, None]
    canon = (k1 > 0) | ((k1 == 0) & (k2 > 0))
    kk = k1 * k1 + k2 * k2
    kabs = np.sqrt(np.where(canon, kk, 1).astype(float))
    # basis direction k_perp/(2 pi |k|), zero on unused slots
    phi1 = np.where(canon, -k2 / (TWO_PI * kabs), 0.0)
    phi2 = np.where(canon, k1 / (TWO_PI * kabs), 0.0)
    for arr in (k1, k2, canon, kk, kabs, phi1, phi2):
        arr.setflags(write=False)
    return k1, k2, canon, kk, kabs, phi1, phi2


def canonical_shape(n: int) -> tuple[int, int]:
    return (n // 2 + 1, n + 1)


def is_canonical(k1: int, k2: int) -> bool:
    return k1 > 0 or (k1 == 0 and k2 > 0)


class SpectralField:
    """Immutable truncated divergence-free field at resolution n.

    Coefficients live on the canonical half-lattice; the conjugate partner
    u_{-k} = -conj(u_k) is implicit.  Arithmetic is only defined between
    fields of equal resolution, and scalar multiplication is restricted to
    real scalars (complex scalars would break the reality constraint).
    """

    __slots__ = ("n", "c")

    def __init__(self, n: int, coeffs: np.ndarray):
        k1, k2, canon, _, _, _, _ = _lattice(n)
        if coeffs.shape != canonical_shape(n):
            raise ResolutionMismatch(
                f"coefficient array shape {coeffs.shape} != {canonical_shape(n)}"
            )
        c = np.where(canon, coeffs, 0.0).astype(np.complex128)
        c.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "c", c)

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, n: int) -> "SpectralField":
        return cls(n, np.zeros(canonical_shape(n), dtype=np.complex128))

    @classmethod
    def from_modes(cls, n: int, modes) -> "SpectralField":
        """Build a field from (k, u_k) pairs, auto-filling conjugate partners.

        Listing both +k and -k is allowed only if the pair is consistent:
        conj(u_k) = -u_{-k} within 1e-12 (scaled by the coefficient size).
        """
        half = n // 2
        seen: dict[tuple[int, int], complex] = {}
        for (m1, m2), val in modes:
            m1, m2 = int(m1), int(m2)
            if (m1, m2) == (0, 0):
                raise ZeroMode("mode (0,0) is excluded (mean-zero fields)")
            if max(abs(m1), abs(m2)) > half:
                raise ResolutionMismatch(f"mode {(m1, m2)} outside |k|_inf <= {half}")
            val = complex(val)
            if (m1, m2) in seen and abs(seen[(m1, m2)] - val) > 1e-12 * max(1.0, abs(val)):
                raise InconsistentConjugatePair(f"mode {(m1, m2)} listed twice with different values")
            seen[(m1, m2)] = val

        for (m1, m2), val in seen.items():
            if (-m1, -m2) in seen:
                other = seen[(-m1, -m2)]
                if abs(np.conj(val) + other) > 1e-12 * max(1.0, abs(val), abs(other)):
                    raise InconsistentConjugatePair(
                        f"modes {(m1, m2)} / {(-m1, -m2)} violate conj(u_k) = -u_(-k)"
                    )
        c = np.zeros(canonical_shape(n), dtype=np.complex128)
        # derived partners first so directly-supplied canonical values win
        for (m1, m2), val in seen.items():
            if not is_canonical(m1, m2):
                c[-m1, -m2 + half] = -np.conj(val)
        for (m1, m2), val in seen.items():
            if is_canonical(m1, m2):
                c[m1, m2 + half] = val
        return cls(n, c)

    # -- basic queries ------------------------------------------------------

    def coeff(self, k1: int, k2: int) -> complex:
        """Coefficient u_k for any nonzero mode in range (partner implied)."""
        half = self.n // 2
        if (k1, k2) == (0, 0):
            raise ZeroMode("mode (0,0) is excluded")
        if max(abs(k1), abs(k2)) > half:
            raise ResolutionMismatch(f"mode {(k1, k2)} outside |k|_inf <= {half}")
        if is_canonical(k1, k2):
            return complex(self.c[k1, k2 + half])
        return complex(-np.conj(self.c[-k1, -k2 + half]))

    def active_modes(self):
        """Yield (k1, k2, u_k) over the full lattice (both orientations)."""
        k1a, k2a, canon, _, _, _, _ = _lattice(self.n)
        for i, j in zip(*np.nonzero(canon)):
            val = self.c[i, j]
            yield int(k1a[i, j]), int(k2a[i, j]), complex(val)
            yield int(-k1a[i, j]), int(-k2a[i, j]), complex(-np.conj(val))

    @property
    def max_mode_inf(self) -> int:
        k1a, k2a, _, _, _, _, _ = _lattice(self.n)
        nz = self.c != 0
        if not nz.any():
            return 0
        return int(np.max(np.maximum(np.abs(k1a), np.abs(k2a))[nz]))

    def is_zero(self) -> bool:
        return not np.any(self.c)

    def has_nonfinite(self) -> bool:
        return not np.all(np.isfinite(self.c))

    # -- algebra -------------------------------------------------------------

    def _require_same(self, other: "SpectralField") -> None:
        if self.n != other.n:
            raise ResolutionMismatch(f"resolutions differ: {self.n} vs {other.n}")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._require_same(other)
        return SpectralField(self.n, self.c + other.c)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._require_same(other)
        return SpectralField(self.n, self.c - other.c)

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.n, -self.c)

    def __mul__(self, scalar) -> "SpectralField":
        if isinstance(scalar, complex) and scalar.imag != 0.0:
            raise ValueError("only real scalars preserve the reality constraint")
        return SpectralField(self.n, self.c * float(np.real(scalar)))

    __rmul__ = __mul__

    def scale_radial(self, weights: np.ndarray) -> "SpectralField":
        """Multiply each coefficient by a real weight indexed like the lattice."""
        return SpectralField(self.n, self.c * weights)

    def divide_radial(self, weights: np.ndarray) -> "SpectralField":
        """Divide by real weights (a true division inverts an exact multiply exactly).

        Divides the real and imaginary parts separately; numpy's complex/real
        division would route through full complex division and round where
        the componentwise quotient is exact.
        """
        _, _, canon, _, _, _, _ = _lattice(self.n)
        w = np.where(canon, weights, 1.0)
        out = np.empty_like(self.c)
        out.real = self.c.real / w
        out.imag = self.c.imag / w
        return SpectralField(self.n, out)

    def radial_weights(self, fn) -> np.ndarray:
        """Evaluate fn(|k|^2 int array) -> real weights on the canonical layout."""
        _, _, canon, kk, _, _, _ = _lattice(self.n)
        return np.where(canon, fn(np.where(canon, kk, 1)), 0.0)

    def truncated_inf(self, band: int) -> "SpectralField":
        """Zero out all modes with |k|_inf > band."""
        k1a, k2a, _, _, _, _, _ = _lattice(self.n)
        keep = np.maximum(np.abs(k1a), np.abs(k2a)) <= band
        return SpectralField(self.n, np.where(keep, self.c, 0.0))

    def low_pass(self, k_cut: int) -> "SpectralField":
        """Keep modes with Euclidean |k| <= k_cut."""
        _, _, _, kk, _, _, _ = _lattice(self.n)
        return SpectralField(self.n, np.where(kk <= k_cut * k_cut, self.c, 0.0))

    # -- inner products and quick norms ---------------------------------------

    def inner(self, other: "SpectralField") -> float:
        """L2 inner product (u, v) = sum_k u_k conj(v_k); real by reality."""
        self._require_same(other)
        return 2.0 * float(np.real(np.vdot(other.c, self.c)))

    def energy(self) -> float:
        """Squared L2 norm sum_k |u_k|^2."""
        return 2.0 * float(np.sum(np.abs(self.c) ** 2))

    def l2_norm(self) -> float:
        return float(np.sqrt(self.energy()))

    def h_norm(self, s: float) -> float:
        """Sobolev H^s_2 norm via Parseval: (sum |k|^(2s) |u_k|^2)^(1/2)."""
        _, _, canon, kk, _, _, _ = _lattice(self.n)
        w = np.where(canon, np.where(canon, kk, 1).astype(float) ** float(s), 0.0)
        return float(np.sqrt(2.0 * np.sum(w * np.abs(self.c) ** 2)))

    # -- grid transforms -------------------------------------------------------

    def full_coefficient_arrays(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Velocity Fourier coefficients (of exp(i k.xi)) on the m x m FFT layout."""
        if m < self.n:
            raise ResolutionMismatch(f"grid size {m} < resolution {self.n}")
        k1a, k2a, canon, _, _, phi1, phi2 = _lattice(self.n)
        w1 = self.c * phi1
        w2 = self.c * phi2
        cx = np.zeros((m, m), dtype=np.complex128)
        cy = np.zeros((m, m), dtype=np.complex128)
        i1c, i2c = k1a[canon] % m, k2a[canon] % m
        i1p, i2p = (-k1a[canon]) % m, (-k2a[canon]) % m
        if m >= self.n + 1:
            cx[i1c, i2c] = w1[canon]
            cy[i1c, i2c] = w2[canon]
            cx[i1p, i2p] += np.conj(w1[canon])
            cy[i1p, i2p] += np.conj(w2[canon])
        else:
            # m == n: Nyquist partners alias onto shared slots
            np.add.at(cx, (i1c, i2c), w1[canon])
            np.add.at(cy, (i1c, i2c), w2[canon])
            np.add.at(cx, (i1p, i2p), np.conj(w1[canon]))
            np.add.at(cy, (i1p, i2p), np.conj(w2[canon]))
        return cx, cy

    def to_grid(self, m: int | None = None) -> "GridField":
        """Evaluate the field on the uniform m x m grid of [0, 2pi)^2.

        m defaults to 2n (exact trapezoidal quadrature for quadratic
        quantities of the reconstructed trigonometric polynomial).
        """
        if m is None:
            m = 2 * self.n
        cx, cy = self.full_coefficient_arrays(m)
        vx = np.fft.ifft2(cx).real * (m * m)
        vy = np.fft.ifft2(cy).real * (m * m)
        return GridField(np.stack([vx, vy], axis=-1))

    @classmethod
    def from_grid(cls, grid: "GridField", n: int) -> "SpectralField":
        """Project a real grid field onto the divergence-free basis.

        This is the Leray projection: gradient parts pair to zero against
        the basis, the mean mode is dropped.
        """
        m = grid.m
        if m < n:
            raise ResolutionMismatch(f"grid size {m} < resolution {n}")
        k1a, k2a, canon, _, kabs, _, _ = _lattice(n)
        cx = np.fft.fft2(grid.values[:, :, 0]) / (m * m)
        cy = np.fft.fft2(grid.values[:, :, 1]) / (m * m)
        i1, i2 = k1a % m, k2a % m
        wx = cx[i1, i2]
        wy = cy[i1, i2]
        # u_k = 2 pi (W_k . k_perp) / |k|
        coeffs = TWO_PI * (wx * (-k2a) + wy * k1a) / kabs
        return cls(n, np.where(canon, coeffs, 0.0))

    # -- stream function --------------------------------------------------------

    def stream_coefficients(self) -> dict[tuple[int, int], complex]:
        """Scalar coefficients psi_k with u = perp-gradient of psi.

        Convention: psi(xi) = sum_k psi_k exp(i k.xi) / (2 pi); the per-mode
        relation is psi_k = -i u_k / |k| (equivalently u_k = i |k| psi_k).
        """
        out: dict[tuple[int, int], complex] = {}
        for k1, k2, uk in self.active_modes():
            out[(k1, k2)] = complex(-1j * uk / np.hypot(k1, k2))
        return out


def stream_function(u: SpectralField) -> dict[tuple[int, int], complex]:
    """Scalar stream-function coefficients of a velocity field (u = perp-grad psi)."""
    return u.stream_coefficients()


@dataclass(frozen=True)
class GridField:
    """Real velocity samples on the uniform grid of [0, 2pi)^2, shape (m, m, 2)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or v.shape[0] != v.shape[1] or v.shape[2] != 2:
            raise ResolutionMismatch(f"grid values must have shape (m, m, 2), got {v.shape}")
        scale = float(np.max(np.abs(v))) if v.size else 0.0
        means = np.abs(v.mean(axis=(0, 1)))
        if np.any(means > 1e-12 * max(scale, 1e-300) + 1e-300):
            raise ValueError("grid field components must have zero mean")
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def pointwise_magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=-1))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def grid_nodes(m: int) -> np.ndarray:
    """1D array of grid coordinates 2 pi a / m."""
    return TWO_PI * np.arange(m) / m


def scalar_modes_to_grid(coeffs: dict[tuple[int, int], complex], m: int) -> np.ndarray:
    """Evaluate a scalar spectrum sum_k c_k exp(i k.xi)/(2 pi) on the m x m grid."""
    c = np.zeros((m, m), dtype=np.complex128)
    for (k1, k2), val in coeffs.items():
        c[k1 % m, k2 % m] += val / TWO_PI
    return np.fft.ifft2(c).real * (m * m)


def grid_gradient(scalar: np.ndarray) -> np.ndarray:
    """Spectral gradient of a scalar grid sample, shape (m, m, 2)."""
    m = scalar.shape[0]
    k = np.fft.fftfreq(m, d=1.0 / m)
    fh = np.fft.fft2(scalar)
    dx = np.fft.ifft2(1j * k[:, None] * fh).real
    dy = np.fft.ifft2(1j * k[None, :] * fh).real
    return np.stack([dx, dy], axis=-1)


def grid_perp_gradient(scalar: np.ndarray) -> np.ndarray:
    """(-d/dxi2, d/dxi1) of a scalar grid sample."""
    g = grid_gradient(scalar)
    return np.stack([-g[:, :, 1], g[:, :, 0]], axis=-1)


def grid_divergence(grid: GridField) -> np.ndarray:
    """Spectral divergence of a grid velocity field."""
    m = grid.m
    k = np.fft.fftfreq(m, d=1.0 / m)
    fx = np.fft.fft2(grid.values[:, :, 0])
    fy = np.fft.fft2(grid.values[:, :, 1])
    return np.fft.ifft2(1j * k[:, None] * fx + 1j * k[None, :] * fy).real


def grid_velocity_gradient(grid: GridField) -> np.ndarray:
    """All four derivatives d u_i / d xi_j on the grid, shape (m, m, 2, 2)."""
    m = grid.m
    k = np.fft.fftfreq(m, d=1.0 / m)
    out = np.empty((m, m, 2, 2))
    for i in range(2):
        fh = np.fft.fft2(grid.values[:, :, i])
        out[:, :, i, 0] = np.fft.ifft2(1j * k[:, None] * fh).real
        out[:, :, i, 1] = np.fft.ifft2(1j * k[None, :] * fh).real
    return out


_RANDOM_MASTER_N = 256


@lru_cache(maxsize=64)
def _master_noise(seed: int) -> np.ndarray:
    """Complex standard normals on the master lattice, one draw per seed.

    Each mode's noise is a function of (seed, k) alone, so the same seed
    yields the same underlying field truncated at every resolution; that is
    what makes cross-resolution constant measurements comparable.
    """
    rng = np.random.default_rng(seed)
    shape = canonical_shape(_RANDOM_MASTER_N)
    xi = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    xi.setflags(write=False)
    return xi


def random_field(
    n: int,
    gamma: float,
    seed: int,
    band: int | None = None,
    amplitude: float = 1.0,
) -> SpectralField:
    """Random field with power-law coefficients u_k = amplitude |k|^(-gamma) xi_k.

    xi_k are complex standard normal, deterministic per seed and per mode
    (independent of n, up to the master resolution).  band, when given,
    restricts the support to |k|_inf <= band.
    """
    if n > _RANDOM_MASTER_N:
        raise ResolutionMismatch(f"random fields capped at resolution {_RANDOM_MASTER_N}")
    k1a, k2a, canon, kk, _, _, _ = _lattice(n)
    half, master_half = n // 2, _RANDOM_MASTER_N // 2
    xi = _master_noise(int(seed))[: half + 1, master_half - half: master_half + half + 1]
    mag = np.where(canon, kk, 1).astype(float) ** (-float(gamma) / 2.0)
    c = amplitude * mag * xi
    if band is not None:
        keep = np.maximum(np.abs(k1a), np.abs(k2a)) <= band
        c = np.where(keep, c, 0.0)
    return SpectralField(n, np.where(canon, c, 0.0))


def gamma_for_regularity(sigma: float, margin: float = 0.5) -> float:
    """Power-law exponent putting random fields near regularity sigma.

    A field with |u_k| ~ |k|^(-gamma) has dyadic block L2 norms ~ 2^(m(1-gamma)),
    so its B^sigma norms are marginal at gamma = sigma + 1; the margin keeps
    truncated norms convergent across resolutions.
    """
    return float(sigma) + 1.0 + margin


# -- snapshot persistence -------------------------------------------------------


def save_snapshot(field: SpectralField, path, time: float = 0.0) -> None:
    """Write the binary snapshot: header (magic, version, N, time) + canonical coeffs."""
    _, _, canon, _, _, _, _ = _lattice(field.n)
    payload = field.c[canon]  # row-major canonical order by construction
    buf = bytearray()
    buf += SNAPSHOT_MAGIC
    buf += struct.pack("<I", SNAPSHOT_VERSION)
    buf += struct.pack("<I", field.n)
    buf += struct.pack("<d", float(time))
    interleaved = np.empty(2 * payload.size, dtype="<f8")
    interleaved[0::2] = payload.real
    interleaved[1::2] = payload.imag
    buf += interleaved.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(buf))


def load_snapshot(path) -> tuple[SpectralField, float]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise ValueError("bad snapshot magic")
    version = struct.unpack("<I", raw[4:8])[0]
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    n = struct.unpack("<I", raw[8:12])[0]
    time = struct.unpack("<d", raw[12:20])[0]
    _, _, canon, _, _, _, _ = _lattice(n)
    count = int(np.count_nonzero(canon))
    data = np.frombuffer(raw[20:], dtype="<f8")
    if data.size != 2 * count:
        raise ValueError("snapshot payload size mismatch")
    coeffs = np.zeros(canonical_shape(n), dtype=np.complex128)
    coeffs[canon] = data[0::2] + 1j * data[1::2]
    return SpectralField(n, coeffs), time
