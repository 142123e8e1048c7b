"""Exception types shared across the package."""


class SpectralError(Exception):
    """Base class for field construction and transform errors."""


class ZeroMode(SpectralError):
    """The mean mode k=(0,0) is structurally excluded."""


class InconsistentConjugatePair(SpectralError):
    """Both +/-k were supplied but violate conj(u_k) = -u_{-k}."""


class ResolutionMismatch(SpectralError):
    """Grid or mode resolution incompatible with the requested operation."""


class OracleCapExceeded(SpectralError):
    """Brute-force oracle refused a resolution above its configured cap."""


class InadmissibleParams(Exception):
    """Parameter tuple failed the required admissibility gate."""


class SmallnessBoundViolation(Exception):
    """No positive local time satisfies the smallness bound at the configured constants."""


class NonConvergent(Exception):
    """Picard iteration exhausted its budget without meeting tolerance."""


class CutoffExhausted(Exception):
    """Splitting cutoff reached the resolution limit before meeting the target."""


class SmallnessViolation(Exception):
    """Rough-part data exceeded the configured smallness thresholds."""


class NonFiniteField(Exception):
    """A field coefficient became non-finite (blow-up signal)."""
