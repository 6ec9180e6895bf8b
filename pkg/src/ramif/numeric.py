"""Finite-difference derivatives and slash-action checks for functions of z.

Functions passed in take a Python complex and return a complex number or a
numpy array (vector-valued forms are handled componentwise).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .point import SAMPLE_POINTS

# central stencils for first and second derivatives, offsets -2..2
_D1 = {2: (0.0, -0.5, 0.0, 0.5, 0.0), 4: (1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12)}
_D2 = {2: (0.0, 1.0, -2.0, 1.0, 0.0), 4: (-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12)}


@dataclass(frozen=True)
class StencilConfig:
    """Step size h (absolute) or rel_h (times Im z); order 2 or 4."""

    h: float | None = None
    order: int = 4
    rel_h: float = 1e-3

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")
        if self.h is not None and not self.h > 0:
            raise ValueError("step size must be positive")

    def step(self, z: complex) -> float:
        h = self.h if self.h is not None else self.rel_h * z.imag
        if z.imag - 2 * h <= 0:
            raise ValueError(f"stencil at {z} with h={h} leaves the upper half plane")
        return h


DEFAULT_STENCIL = StencilConfig()


@dataclass(frozen=True)
class ModularMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self} is not 1")

    def __matmul__(self, other: "ModularMatrix") -> "ModularMatrix":
        return ModularMatrix(
            self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d,
        )

    def act(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def inverse(self) -> "ModularMatrix":
        return ModularMatrix(self.d, -self.b, -self.c, self.a)

    def automorphy(self, z, weights) -> complex:
        r, s = weights
        j = self.c * z + self.d
        return j ** (-r) * np.conj(j) ** (-s)


S = ModularMatrix(0, -1, 1, 0)
T = ModularMatrix(1, 1, 0, 1)
IDENTITY = ModularMatrix(1, 0, 0, 1)


def _samples(f, z, h, direction):
    return [np.asarray(f(z + k * h * direction)) for k in range(-2, 3)]


def _apply(stencil, vals, h, power):
    out = sum(c * v for c, v in zip(stencil, vals) if c)
    return out / h ** power


def fd_partials(f: Callable, z: complex, cfg: StencilConfig = DEFAULT_STENCIL):
    """f, f_x, f_y, f_xx, f_yy at z from the axis stencils."""
    z = complex(z)
    h = cfg.step(z)
    vx = _samples(f, z, h, 1)
    vy = _samples(f, z, h, 1j)
    f0 = vx[2]
    return (f0, _apply(_D1[cfg.order], vx, h, 1), _apply(_D1[cfg.order], vy, h, 1),
            _apply(_D2[cfg.order], vx, h, 2), _apply(_D2[cfg.order], vy, h, 2))


def fd_dz(f: Callable, z: complex, cfg: StencilConfig = DEFAULT_STENCIL):
    fx, fy = _first(f, z, cfg)
    return 0.5 * (fx - 1j * fy)


def fd_dzbar(f: Callable, z: complex, cfg: StencilConfig = DEFAULT_STENCIL):
    fx, fy = _first(f, z, cfg)
    return 0.5 * (fx + 1j * fy)


def _first(f, z, cfg):
    z = complex(z)
    h = cfg.step(z)
    vx = _samples(f, z, h, 1)
    vy = _samples(f, z, h, 1j)
    return _apply(_D1[cfg.order], vx, h, 1), _apply(_D1[cfg.order], vy, h, 1)


def fd_error(op: Callable, f: Callable, z: complex, cfg: StencilConfig = DEFAULT_STENCIL) -> float:
    """Richardson-style truncation estimate |D(h) - D(2h)| / (2^order - 1)."""
    z = complex(z)
    h = cfg.step(z)
    coarse = StencilConfig(h=2 * h, order=cfg.order) if z.imag > 4 * h else StencilConfig(h=h / 2, order=cfg.order)
    a = np.asarray(op(f, z, StencilConfig(h=h, order=cfg.order)))
    b = np.asarray(op(f, z, coarse))
    return float(np.max(np.abs(a - b))) / (2 ** cfg.order - 1)


def fd_laplacian(f: Callable, weights, z: complex, cfg: StencilConfig = DEFAULT_STENCIL):
    """Weight-(r, s) Laplacian -dbar_{s-1} d_r + r(s-1) by finite differences.

    Expanding the two first-order operators gives
    -y^2 (f_xx + f_yy) - 2isy f_z + 2iry f_zbar, which is what is evaluated.
    """
    r, s = weights
    z = complex(z)
    y = z.imag
    f0, fx, fy, fxx, fyy = fd_partials(f, z, cfg)
    fz = 0.5 * (fx - 1j * fy)
    fzb = 0.5 * (fx + 1j * fy)
    return -y * y * (fxx + fyy) - 2j * s * y * fz + 2j * r * y * fzb


def fd_partial(f: Callable, r: int, z: complex, cfg: StencilConfig = DEFAULT_STENCIL):
    z = complex(z)
    return 2j * z.imag * fd_dz(f, z, cfg) + r * np.asarray(f(z))


def fd_partial_bar(f: Callable, s: int, z: complex, cfg: StencilConfig = DEFAULT_STENCIL):
    z = complex(z)
    return -2j * z.imag * fd_dzbar(f, z, cfg) + s * np.asarray(f(z))


def slash(f: Callable, weights, gamma: ModularMatrix) -> Callable:
    """The function z -> (cz+d)^-r (c zbar+d)^-s f(gamma z)."""
    def g(z):
        return gamma.automorphy(z, weights) * np.asarray(f(gamma.act(z)))
    return g


def slash_residuals(f: Callable, weights, gamma: ModularMatrix,
                    points: Iterable[complex] = SAMPLE_POINTS) -> list:
    g = slash(f, weights, gamma)
    return [float(np.max(np.abs(np.asarray(g(z)) - np.asarray(f(z))))) for z in points]


def modularity_residual(f: Callable, weights, gamma: ModularMatrix,
                        points: Sequence[complex] = SAMPLE_POINTS) -> float:
    return max(slash_residuals(f, weights, gamma, points))


def closure_residual(u1: Callable, u2: Callable, z: complex,
                     cfg: StencilConfig = DEFAULT_STENCIL) -> float:
    """Max norm of d(u1 dz + u2 dzbar) / (dzbar ^ dz) = du1/dzbar - du2/dz."""
    d = np.asarray(fd_dzbar(u1, z, cfg)) - np.asarray(fd_dz(u2, z, cfg))
    return float(np.max(np.abs(d)))
