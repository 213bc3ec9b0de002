"""Brute-force exact diagonalization of the TFIM ring, L <= 14.

Basis states are integers in the z-product basis, bit i set meaning
sz_i = -1. sx_i sx_j flips bits i and j, so H is applied matrix-free with
index arithmetic; only L <= 10 ever materialises a dense matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache, partial

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, eigsh

from errors import DimensionTooLarge

logger = logging.getLogger("qwd")

MAX_SITES = 14
DENSE_SITES = 10
DEGENERACY_GAP = 1e-10
LANCZOS_TOL = 1e-12
LANCZOS_SEED = 20240601
# Ring sizes behind the L -> infinity estimates.
EXTRAPOLATION_SIZES = (10, 12, 14)


@dataclass(frozen=True, eq=False)
class EDSolution:
    L: int
    g: float
    energy: float
    amplitudes: np.ndarray
    degenerate: bool
    periodic: bool = True


@lru_cache(maxsize=None)
def _basis(L: int) -> np.ndarray:
    basis = np.arange(1 << L, dtype=np.int64)
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=None)
def _field_diagonal(L: int) -> np.ndarray:
    """sum_i sz_i for every basis state."""
    basis = _basis(L)
    down = sum((basis >> i) & 1 for i in range(L))
    diagonal = (L - 2 * down).astype(float)
    diagonal.setflags(write=False)
    return diagonal


def _bond_masks(L: int, periodic: bool) -> list[int]:
    # L = 2 periodic counts the (0, 1) bond twice, as the ring Hamiltonian does.
    bonds = range(L) if periodic else range(L - 1)
    return [(1 << i) | (1 << ((i + 1) % L)) for i in bonds]


def apply_hamiltonian(L: int, g: float, psi: np.ndarray, periodic: bool = True):
    basis = _basis(L)
    out = -g * _field_diagonal(L) * psi
    for mask in _bond_masks(L, periodic):
        out -= psi[basis ^ mask]
    return out


def apply_mx(L: int, psi: np.ndarray) -> np.ndarray:
    """Mx = sum_i sx_i on a vector, or column-wise on a (2^L, k) block."""
    basis = _basis(L)
    out = np.zeros_like(psi)
    for i in range(L):
        out += psi[basis ^ (1 << i)]
    return out


def _dense_hamiltonian(L: int, g: float, periodic: bool) -> np.ndarray:
    basis = _basis(L)
    matrix = np.diag(-g * _field_diagonal(L))
    for mask in _bond_masks(L, periodic):
        matrix[basis, basis ^ mask] -= 1.0
    return matrix


def _lowest_pair(L: int, g: float, periodic: bool):
    if L <= DENSE_SITES:
        return scipy.linalg.eigh(
            _dense_hamiltonian(L, g, periodic), subset_by_index=[0, 1]
        )
    dim = 1 << L
    apply = partial(apply_hamiltonian, L, g, periodic=periodic)
    operator = LinearOperator(
        (dim, dim), matvec=lambda v: apply(np.ravel(v)), dtype=float
    )
    v0 = np.random.default_rng(LANCZOS_SEED).standard_normal(dim)
    energies, vectors = eigsh(operator, k=2, which="SA", tol=LANCZOS_TOL, v0=v0)
    order = np.argsort(energies)
    return energies[order], vectors[:, order]


def ground_state(L: int, g: float, periodic: bool = True) -> EDSolution:
    """Lowest eigenvector of H = -sum sx sx - g sum sz.

    When the lowest two levels are degenerate within DEGENERACY_GAP the
    returned state is the combination of the pair that maximises <Mx>, the
    symmetry-broken state of the ordered phase.
    """
    if L > MAX_SITES:
        raise DimensionTooLarge(f"ed_oracle: L={L} exceeds {MAX_SITES} sites")
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")

    energies, vectors = _lowest_pair(L, g, periodic)
    degenerate = bool(energies[1] - energies[0] < DEGENERACY_GAP)
    if degenerate:
        pair = vectors[:, :2]
        _, rotation = np.linalg.eigh(pair.T @ apply_mx(L, pair))
        psi = pair @ rotation[:, -1]
    else:
        psi = vectors[:, 0]
    psi = psi / np.linalg.norm(psi)
    # Fix the global sign so repeated solves agree.
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    psi.setflags(write=False)
    logger.debug(
        "ed L=%d g=%r: E0=%.12f degenerate=%s", L, g, energies[0], degenerate
    )
    return EDSolution(
        L=L,
        g=g,
        energy=float(energies[0]),
        amplitudes=psi,
        degenerate=degenerate,
        periodic=periodic,
    )


def site_xx_correlator(sol: EDSolution, i: int, n: int) -> float:
    """<sx_i sx_{i+n}> without translation averaging."""
    j = (i + n) % sol.L
    mask = (1 << i) | (1 << j)
    psi = sol.amplitudes
    return float(np.dot(psi, psi[_basis(sol.L) ^ mask]))


def ed_xx_correlator(sol: EDSolution, n: int) -> float:
    """<sx_0 sx_n> averaged over all translations of the ring."""
    if not 1 <= n <= sol.L - 1:
        raise ValueError(f"separation must be in 1..{sol.L - 1}, got {n}")
    starts = range(sol.L) if sol.periodic else range(sol.L - n)
    values = [site_xx_correlator(sol, i, n) for i in starts]
    return float(np.mean(values))


def ed_mx_moments(sol: EDSolution) -> tuple[float, float]:
    mx_psi = apply_mx(sol.L, sol.amplitudes)
    return float(np.dot(sol.amplitudes, mx_psi)), float(np.dot(mx_psi, mx_psi))


def extrapolate_geometric(values):
    """Limit of sequences whose last three terms converge geometrically.

    Aitken's delta-squared step over the first axis of `values` (shape (k,)
    or (k, m) with k >= 3), applied column by column. Where the last two
    differences do not shrink by a common ratio in (0, 1) the last term is
    returned unchanged.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 3:
        raise ValueError(f"need >= 3 terms to extrapolate, got {values.shape[0]}")
    a, b, c = values[-3], values[-2], values[-1]
    d0, d1 = b - a, c - b
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = d1 / d0
        limit = c + d1 * ratio / (1.0 - ratio)
    converging = np.isfinite(ratio) & (ratio > 0) & (ratio < 1)
    result = np.where(converging, limit, c)
    return float(result) if result.ndim == 0 else result


def size_extrapolated(g: float, observable, sizes=EXTRAPOLATION_SIZES):
    """observable(ground_state(L, g)) carried to L -> infinity.

    Finite-ring corrections to correlators decay exponentially in L away
    from g = 1, so consecutive even sizes form a geometric sequence.
    `observable` may return a scalar or a sequence of values.
    """
    sizes = sorted(int(L) for L in sizes)
    values = [np.asarray(observable(ground_state(L, g)), dtype=float) for L in sizes]
    limit = extrapolate_geometric(values)
    logger.debug("ed g=%r: extrapolated over L=%s", g, sizes)
    return limit
