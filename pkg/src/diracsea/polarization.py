"""Projector algebra for polarization classes.

Hilbert-Schmidt norms are Frobenius norms at finite N; class statements
become cutoff-scaling statements recorded across lattice sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .lattice import (LatticeConfig, Potential1p1, UnitaryMap, evolve,
                      free_hamiltonian, spectral_projectors)

EXACT_PROJECTOR_TOL = 1e-10


@dataclass
class Projector:
    matrix: np.ndarray
    idempotency_defect: float
    hermiticity_defect: float

    @classmethod
    def from_matrix(cls, P: np.ndarray) -> "Projector":
        return cls(
            matrix=P,
            idempotency_defect=float(np.linalg.norm(P @ P - P)),
            hermiticity_defect=float(np.linalg.norm(P - P.conj().T)),
        )

    def check_exact(self, tol: float = EXACT_PROJECTOR_TOL):
        if self.idempotency_defect > tol or self.hermiticity_defect > tol:
            raise ValueError(
                f"not an exact projector: idempotency {self.idempotency_defect:.3e}, "
                f"hermiticity {self.hermiticity_defect:.3e}")
        return self


@dataclass
class ShaleReport:
    hs_plus_minus: float
    hs_minus_plus: float


@dataclass
class Blocks:
    upp: np.ndarray
    upm: np.ndarray
    ump: np.ndarray
    umm: np.ndarray
    report: ShaleReport


def hs_norm(op: np.ndarray) -> float:
    return float(np.linalg.norm(op))


def blocks(U, projectors_in, projectors_out, tol: float = 1e-8) -> Blocks:
    """Split U into blocks w.r.t. (P-, P+) pairs on each side.

    Block labels follow U_ab = P^a_out U P^b_in with a, b in {+, -}; the
    Shale report carries the off-diagonal HS norms.
    """
    mat = U.matrix if isinstance(U, UnitaryMap) else np.asarray(U)
    p_minus_in, p_plus_in = _as_matrices(projectors_in)
    p_minus_out, p_plus_out = _as_matrices(projectors_out)
    n = mat.shape[0]
    if p_minus_in.shape != mat.shape or p_minus_out.shape != mat.shape:
        raise ValueError("projector dimensions do not match the unitary")
    eye = np.eye(n)
    if (np.linalg.norm(p_minus_in + p_plus_in - eye) > tol
            or np.linalg.norm(p_minus_out + p_plus_out - eye) > tol):
        raise ValueError("projector pair does not resolve the identity")
    upp = p_plus_out @ mat @ p_plus_in
    upm = p_plus_out @ mat @ p_minus_in
    ump = p_minus_out @ mat @ p_plus_in
    umm = p_minus_out @ mat @ p_minus_in
    return Blocks(upp, upm, ump, umm,
                  ShaleReport(hs_norm(upm), hs_norm(ump)))


def _as_matrices(pair):
    out = []
    for p in pair:
        out.append(p.matrix if isinstance(p, Projector) else np.asarray(p))
    return out


def free_projectors(config: LatticeConfig):
    """(P-, P+) of the free Hamiltonian."""
    p_plus, p_minus = spectral_projectors(free_hamiltonian(config))
    return Projector.from_matrix(p_minus), Projector.from_matrix(p_plus)


def periodic_displacement(config: LatticeConfig) -> np.ndarray:
    """d[k, l]: signed minimal wrap of x_l - x_k into (-L/2, L/2], with the
    antipodal tie broken toward +L/2."""
    x = config.x
    d = x[None, :] - x[:, None]
    L = config.L
    d = d - L * np.floor(d / L + 0.5)
    d[np.isclose(d, -0.5 * L)] = 0.5 * L
    return d


def local_gauge_projector(config: LatticeConfig, pot: Potential1p1, t: float,
                          sign: float = 1.0, a1_values=None) -> Projector:
    """Local-gauge-transported projector with kernel
    exp(-i e lambda(x, y)) P^-(x, y), lambda = sign * A1(t, x) d(x, y).

    Generically neither Hermitian nor idempotent at finite N; both defects
    are measured outputs.  a1_values overrides the sampled vector potential
    (e.g. a constant profile outside the pulse family).
    """
    p_minus_free, _ = free_projectors(config)
    if a1_values is not None:
        a1 = np.broadcast_to(np.asarray(a1_values, dtype=float), (config.N,))
    else:
        a1 = np.asarray(pot.a1(t, config.x), dtype=float)
    d = periodic_displacement(config)
    lam = sign * a1[:, None] * d
    phase = np.exp(-1j * config.e * lam)
    full_phase = np.kron(np.ones((2, 2)), phase)
    return Projector.from_matrix(full_phase * p_minus_free.matrix)


def key_prop_defects(config: LatticeConfig, pot: Potential1p1,
                     window: tuple[float, float] | None = None,
                     order: int = 2, sign: float = 1.0):
    """(delta1, delta2) with delta1 = ||U P- U^dag - P^A||_HS for U evolved
    from a field-free initial surface, delta2 = ||(P^A)^2 - P^A||_HS."""
    if window is None:
        window = (config.t0, config.t1)
    t_a, t_b = window
    U = evolve(config, pot, t_a, t_b, order=order)
    p_minus_free, _ = free_projectors(config)
    p_interp = U.matrix @ p_minus_free.matrix @ U.matrix.conj().T
    p_a = local_gauge_projector(config, pot, t_b, sign=sign)
    delta1 = hs_norm(p_interp - p_a.matrix)
    delta2 = p_a.idempotency_defect
    return delta1, delta2


def build_Q(p_plus, p_minus, p_a) -> np.ndarray:
    """Anti-Hermitian generator Q = P+ D P- - P- D P+ with
    D the Hermitian part of P^A minus P-."""
    pp = p_plus.matrix if isinstance(p_plus, Projector) else np.asarray(p_plus)
    pm = p_minus.matrix if isinstance(p_minus, Projector) else np.asarray(p_minus)
    pa = p_a.matrix if isinstance(p_a, Projector) else np.asarray(p_a)
    pa_h = 0.5 * (pa + pa.conj().T)
    D = pa_h - pm
    return pp @ D @ pm - pm @ D @ pp


def representative_projector(Q: np.ndarray, p_minus) -> Projector:
    """e^Q P- e^{-Q}: exact projector of the same rank for anti-Hermitian Q."""
    pm = p_minus.matrix if isinstance(p_minus, Projector) else np.asarray(p_minus)
    G = expm(Q)
    return Projector.from_matrix(G @ pm @ G.conj().T)


def class_distance(p_v, p_w) -> float:
    """HS distance between two polarization projectors."""
    pv = p_v.matrix if isinstance(p_v, Projector) else np.asarray(p_v)
    pw = p_w.matrix if isinstance(p_w, Projector) else np.asarray(p_w)
    if pv.shape != pw.shape:
        raise ValueError("projector dimensions differ")
    return hs_norm(pv - pw)
