"""Points of the upper half plane."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath

DEFAULT_PRECISION = 128


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float
    precision_bits: int = DEFAULT_PRECISION

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"point must lie in the upper half plane, got y={self.y}")

    @classmethod
    def coerce(cls, z, precision_bits=DEFAULT_PRECISION) -> "HalfPlanePoint":
        if isinstance(z, HalfPlanePoint):
            return z
        if isinstance(z, str):
            z = parse_complex(z)
        z = complex(z) if not isinstance(z, mpmath.mpc) else z
        return cls(z.real, z.imag, precision_bits)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def mp(self) -> mpmath.mpc:
        with mpmath.workprec(self.precision_bits):
            return mpmath.mpc(self.x, self.y)

    @property
    def q_abs(self) -> float:
        return float(mpmath.exp(-2 * mpmath.pi * self.y))


def parse_complex(text: str) -> complex:
    """Accepts '0.3+1.1i', '1.7i', '0.3+1.1j' and similar."""
    t = text.strip().replace(" ", "").replace("i", "j")
    if t.endswith("j") and t[:-1] in ("", "+", "-"):
        t = t[:-1] + "1j"
    return complex(t)


# generic points avoiding the elliptic fixed points i and rho
SAMPLE_POINTS = (
    complex(0.3, 1.1),
    complex(-0.42, 0.9),
    complex(0.05, 2.0),
    complex(0.51, 0.87),
    complex(0.0, 1.7),
)
