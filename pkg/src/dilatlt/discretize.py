"""Periodic Fourier collocation of the dilated Schrodinger operators.

``scaled``: H(theta) = -e^{-2 theta} D^2 + diag V(e^theta x_j)
``tilde``:  e^{2 theta} H(theta) = -D^2 + e^{2 theta} diag V(e^theta x_j)
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .potentials import PotentialSpec, check_strip, evaluate_dilated

MAX_N = 2048
DEFAULT_L = 16.0
DEFAULT_N = 256
SCALED = "scaled"
TILDE = "tilde"

# on-disk layout of dump_matrix: little-endian complex128, row-major
DUMP_DTYPE = np.dtype("<c16")


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    L: float = DEFAULT_L
    N: int = DEFAULT_N

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and self.N > 0 and self.N % 2 == 0):
            raise GridError(f"N must be a positive even integer, got {self.N!r}")
        if self.N > MAX_N:
            raise GridError(f"N = {self.N} exceeds the dense cap of {MAX_N}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise GridError(f"L must be positive and finite, got {self.L!r}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return 2 * self.L / self.N

    @property
    def nodes(self) -> np.ndarray:
        return -self.L + np.arange(self.N) * self.h

    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.N, d=self.h) * 2 * math.pi

    def refined(self) -> "Grid1D":
        return Grid1D(self.L, 2 * self.N)

    def extended(self) -> "Grid1D":
        return Grid1D(2 * self.L, 2 * self.N)

    def to_dict(self) -> dict:
        return {"L": self.L, "N": self.N}


@lru_cache(maxsize=16)
def _d2(L: float, N: int) -> np.ndarray:
    # circulant: first column is the inverse DFT of the symbol -k^2, with the
    # Nyquist mode kept (symmetric matrix, eigenvalue -(N/2)^2 (pi/L)^2)
    k = np.fft.fftfreq(N, d=1.0 / N)
    k[N // 2] = N // 2
    col = np.real(np.fft.ifft(-(k * math.pi / L) ** 2))
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    D = col[idx]
    D = 0.5 * (D + D.T)
    D.setflags(write=False)
    return D


def fourier_second_derivative(grid: Grid1D) -> np.ndarray:
    """Dense periodic collocation matrix of d^2/dx^2 on the grid."""
    return _d2(grid.L, grid.N)


@dataclass
class ScaledOperatorMatrix:
    theta: complex
    grid: Grid1D
    entries: np.ndarray
    kind: str
    frobenius_norm: float


def _potential_diag(spec: PotentialSpec, theta: complex, grid: Grid1D) -> np.ndarray:
    check_strip(spec, theta)
    return np.asarray(evaluate_dilated(spec, theta, grid.nodes), dtype=np.complex128)


def _assemble(kinetic: complex, potential: np.ndarray, grid: Grid1D) -> np.ndarray:
    A = (-kinetic) * fourier_second_derivative(grid).astype(np.complex128)
    A[np.diag_indices(grid.N)] += potential
    return A


def build_scaled_hamiltonian(spec: PotentialSpec, theta: complex, grid: Grid1D) -> ScaledOperatorMatrix:
    theta = complex(theta)
    v = _potential_diag(spec, theta, grid)
    A = _assemble(cmath.exp(-2 * theta), v, grid)
    return ScaledOperatorMatrix(theta, grid, A, SCALED, float(np.linalg.norm(A)))


def build_tilde_hamiltonian(spec: PotentialSpec, theta: complex, grid: Grid1D) -> ScaledOperatorMatrix:
    theta = complex(theta)
    v = _potential_diag(spec, theta, grid)
    A = _assemble(1.0, cmath.exp(2 * theta) * v, grid)
    return ScaledOperatorMatrix(theta, grid, A, TILDE, float(np.linalg.norm(A)))


def build(spec: PotentialSpec, theta: complex, grid: Grid1D, kind: str = SCALED) -> ScaledOperatorMatrix:
    if kind == SCALED:
        return build_scaled_hamiltonian(spec, theta, grid)
    if kind == TILDE:
        return build_tilde_hamiltonian(spec, theta, grid)
    raise ValueError(f"unknown operator kind {kind!r}")


def dump_matrix(A, path) -> None:
    np.ascontiguousarray(A, dtype=DUMP_DTYPE).tofile(Path(path))


def load_matrix(path, n: int) -> np.ndarray:
    data = np.fromfile(Path(path), dtype=DUMP_DTYPE)
    if data.size != n * n:
        raise ValueError(f"{path} holds {data.size} values, expected {n * n}")
    return data.reshape(n, n).astype(np.complex128)
