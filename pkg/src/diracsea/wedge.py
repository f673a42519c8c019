"""Finite-rank Dirac seas: determinant pairing, left/right operations, the
lifted second-quantized evolution, and a brute-force exterior-algebra oracle.

A sea is a basis map Phi from an M-dimensional index space into the
2N-dimensional one-particle space, stored as a 2N x M array of columns.
The lifted evolution carries the compressed blocks of U w.r.t. the in/out
polarizations, the right operation R = (U--)^-1, and the real non-negative
prefactor det|U--|; that prefactor convention is the reference phase for
every amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .lattice import UnitaryMap

ORACLE_MAX_DIM = 8
ORACLE_MAX_RANK = 4
CONDITION_LIMIT = 1e6


class IllConditionedError(RuntimeError):
    """U-- too singular to invert: the weak-field construction's hypothesis
    (U close to the identity) is violated."""


@dataclass(frozen=True)
class SeaBasis:
    """Basis map of a finite-rank Dirac sea."""

    phi: np.ndarray  # (2N, M)

    def __post_init__(self):
        if self.phi.ndim != 2 or self.phi.shape[0] < self.phi.shape[1]:
            raise ValueError("sea basis must be a tall 2N x M array")

    @property
    def rank(self) -> int:
        return self.phi.shape[1]

    @property
    def dim(self) -> int:
        return self.phi.shape[0]

    @property
    def orthonormality_defect(self) -> float:
        gram = self.phi.conj().T @ self.phi - np.eye(self.rank)
        return float(np.sum(np.linalg.svd(gram, compute_uv=False)))


@dataclass(frozen=True)
class PolarizationBasis:
    """Orthonormal bases of a polarization split: minus spans V, plus V-perp."""

    minus: np.ndarray  # (2N, M)
    plus: np.ndarray   # (2N, 2N - M)

    def __post_init__(self):
        if self.minus.shape[0] != self.plus.shape[0]:
            raise ValueError("plus/minus bases live on different spaces")
        if self.minus.shape[1] + self.plus.shape[1] != self.minus.shape[0]:
            raise ValueError("bases do not span the one-particle space")

    @property
    def rank(self) -> int:
        return self.minus.shape[1]

    def sea(self) -> SeaBasis:
        """Canonical sea: inclusion of the minus eigenbasis."""
        return SeaBasis(self.minus)

    def projector_minus(self) -> np.ndarray:
        return self.minus @ self.minus.conj().T

    def projector_plus(self) -> np.ndarray:
        return self.plus @ self.plus.conj().T


@dataclass(frozen=True)
class LiftedEvolution:
    u: np.ndarray                 # (2N, 2N)
    pol_in: PolarizationBasis
    pol_out: PolarizationBasis
    upp: np.ndarray               # compressed blocks in the eigenbases
    upm: np.ndarray
    ump: np.ndarray
    umm: np.ndarray
    r: np.ndarray                 # (U--)^-1
    prefactor: float              # det|U--|
    smallest_singular: float
    condition_number: float


def _det(mat: np.ndarray) -> complex:
    """Determinant via pivoted factorization with log-magnitude accumulation."""
    sign, logabs = np.linalg.slogdet(mat)
    if sign == 0:
        return 0.0j
    return sign * math.exp(logabs)


def pairing(psi: SeaBasis, phi: SeaBasis) -> complex:
    """<Lambda psi, Lambda phi> = det(psi^dag phi)."""
    if psi.rank != phi.rank or psi.dim != phi.dim:
        raise ValueError("sea dimensions differ")
    return complex(_det(psi.phi.conj().T @ phi.phi))


def left_op(U, phi: SeaBasis) -> SeaBasis:
    """Canonical operation from the left: Lambda phi -> Lambda (U phi)."""
    mat = U.matrix if isinstance(U, UnitaryMap) else np.asarray(U)
    if mat.shape[1] != phi.dim:
        raise ValueError("operator and sea dimensions differ")
    return SeaBasis(mat @ phi.phi)


def right_op(phi: SeaBasis, R: np.ndarray) -> SeaBasis:
    """Operation from the right: Lambda phi -> Lambda (phi R); scales the
    pairing by det(R)."""
    R = np.asarray(R)
    if R.shape != (phi.rank, phi.rank):
        raise ValueError("R must be square of the sea rank")
    sign, _ = np.linalg.slogdet(R)
    if sign == 0:
        raise ValueError("R is singular")
    return SeaBasis(phi.phi @ R)


def lift(U, pol_in: PolarizationBasis, pol_out: PolarizationBasis) -> LiftedEvolution:
    """Second-quantized evolution det|U--| R_{(U--)^-1} o L_U between the
    canonical seas of the given polarizations."""
    mat = U.matrix if isinstance(U, UnitaryMap) else np.asarray(U)
    vm_in, vp_in = pol_in.minus, pol_in.plus
    vm_out, vp_out = pol_out.minus, pol_out.plus
    if pol_in.rank != pol_out.rank:
        raise ValueError("in/out polarizations have different sea ranks")
    umm = vm_out.conj().T @ mat @ vm_in
    upm = vp_out.conj().T @ mat @ vm_in
    ump = vm_out.conj().T @ mat @ vp_in
    upp = vp_out.conj().T @ mat @ vp_in

    svals = np.linalg.svd(umm, compute_uv=False)
    smallest = float(svals[-1])
    cond = float(svals[0] / svals[-1]) if smallest > 0 else math.inf
    # U is unitary, so singular values of U-- live in [0, 1] and the smallest
    # one is itself an absolute conditioning measure
    if smallest < 1.0 / CONDITION_LIMIT or cond > CONDITION_LIMIT:
        raise IllConditionedError(
            f"U-- ill-conditioned: smallest singular value {smallest:.3e} "
            f"(condition number {cond:.3e}); the field is too strong for the "
            "weak-field lift -- reduce the coupling or the pulse amplitude")
    r = np.linalg.inv(umm)
    _, logabs = np.linalg.slogdet(umm)
    prefactor = math.exp(logabs)
    return LiftedEvolution(mat, pol_in, pol_out, upp, upm, ump, umm, r,
                           prefactor, smallest, cond)


def amplitude(lifted: LiftedEvolution, psi_target: SeaBasis) -> complex:
    """prefactor * det(psi^dag U Phi R) with Phi the canonical in-sea."""
    if psi_target.rank != lifted.pol_in.rank:
        raise ValueError("target sea rank differs from the in-polarization rank")
    evolved = lifted.u @ lifted.pol_in.minus @ lifted.r
    return lifted.prefactor * complex(_det(psi_target.phi.conj().T @ evolved))


def oracle_lift(U, phi: SeaBasis, psi_target: SeaBasis) -> complex:
    """Brute-force <Lambda psi, Lambda^M U Lambda phi> on the degree-M
    exterior power; equals pairing(psi, U phi) by Cauchy-Binet."""
    mat = U.matrix if isinstance(U, UnitaryMap) else np.asarray(U)
    n = mat.shape[0]
    m = phi.rank
    if n > ORACLE_MAX_DIM or m > ORACLE_MAX_RANK:
        raise ValueError(
            f"oracle bounded to dim <= {ORACLE_MAX_DIM}, rank <= {ORACLE_MAX_RANK}")
    if psi_target.rank != m:
        raise ValueError("sea ranks differ")
    index_sets = list(combinations(range(n), m))
    # Lambda phi as a vector over sorted index tuples
    v_in = np.array([np.linalg.det(phi.phi[list(s), :]) for s in index_sets])
    # apply Lambda^M U entrywise: minors of U
    lifted_u = np.array([[np.linalg.det(mat[np.ix_(list(t), list(s))])
                          for s in index_sets] for t in index_sets])
    v_out = lifted_u @ v_in
    v_target = np.array([np.linalg.det(psi_target.phi[list(t), :]) for t in index_sets])
    return complex(np.vdot(v_target, v_out))
