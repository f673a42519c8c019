import numpy as np
import pytest

from diracsea import (IllConditionedError, PolarizationBasis, SeaBasis,
                      amplitude, left_op, lift, oracle_lift, pairing,
                      right_op)
from conftest import random_unitary


def _random_sea(rng, n, m):
    z = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
    q, _ = np.linalg.qr(z)
    return SeaBasis(q)


def _random_polarization(rng, n, m):
    q = random_unitary(rng, n)
    return PolarizationBasis(minus=q[:, :m], plus=q[:, m:])


def test_sea_basis_validation(rng):
    with pytest.raises(ValueError):
        SeaBasis(np.zeros((2, 4)))
    sea = _random_sea(rng, 6, 3)
    assert sea.orthonormality_defect < 1e-12
    assert sea.rank == 3 and sea.dim == 6


def test_pairing_is_det_gram(rng):
    a = _random_sea(rng, 6, 3)
    b = _random_sea(rng, 6, 3)
    assert pairing(a, b) == pytest.approx(
        complex(np.linalg.det(a.phi.conj().T @ b.phi)))
    assert pairing(a, a) == pytest.approx(1.0)


def test_pairing_invariant_under_unimodular_reparametrization(rng):
    """Seas related by a determinant-one basis change are the same vector."""
    a = _random_sea(rng, 6, 3)
    b = _random_sea(rng, 6, 3)
    w = random_unitary(rng, 3)
    w = w / np.linalg.det(w) ** (1.0 / 3.0)
    assert abs(np.linalg.det(w) - 1.0) < 1e-10
    assert pairing(a, SeaBasis(b.phi @ w)) == pytest.approx(
        pairing(a, b), abs=1e-10)


def test_right_op_scales_by_det(rng):
    a = _random_sea(rng, 6, 3)
    b = _random_sea(rng, 6, 3)
    R = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert pairing(a, right_op(b, R)) == pytest.approx(
        np.linalg.det(R) * pairing(a, b), rel=1e-10)
    with pytest.raises(ValueError):
        right_op(b, np.zeros((3, 3)))


def test_left_op_matches_oracle(rng):
    for _ in range(5):
        u = random_unitary(rng, 6)
        phi = _random_sea(rng, 6, 3)
        psi = _random_sea(rng, 6, 3)
        direct = pairing(psi, left_op(u, phi))
        oracle = oracle_lift(u, phi, psi)
        assert abs(direct - oracle) < 1e-10


def test_lift_amplitude_matches_oracle_phase(rng):
    """lift + amplitude equals the exterior-power oracle up to the real
    prefactor convention (a det|U--| phase)."""
    for _ in range(5):
        u = random_unitary(rng, 8)
        pol = _random_polarization(rng, 8, 4)
        lifted = lift(u, pol, pol)
        psi = _random_sea(rng, 8, 4)
        amp = amplitude(lifted, psi)
        oracle = oracle_lift(u, pol.sea(), psi)
        umm_det = np.linalg.det(pol.minus.conj().T @ u @ pol.minus)
        phase = umm_det / abs(umm_det)
        assert abs(amp - oracle * np.conj(phase)) < 1e-9


def test_lift_prefactor_and_blocks(rng):
    u = random_unitary(rng, 8)
    pol = _random_polarization(rng, 8, 4)
    lifted = lift(u, pol, pol)
    umm = pol.minus.conj().T @ u @ pol.minus
    assert lifted.prefactor == pytest.approx(abs(np.linalg.det(umm)))
    assert np.allclose(lifted.r @ umm, np.eye(4), atol=1e-10)
    # unitarity of the compressed column: U--^dag U-- + U+-^dag U+- = I
    defect = np.linalg.norm(lifted.umm.conj().T @ lifted.umm
                            + lifted.upm.conj().T @ lifted.upm - np.eye(4))
    assert defect < 1e-10


def test_lift_rejects_ill_conditioned(rng):
    pol = _random_polarization(rng, 6, 3)
    # unitary that swaps the minus and plus subspaces: U-- = 0
    swap = (pol.plus @ pol.minus.conj().T + pol.minus @ pol.plus.conj().T)
    with pytest.raises(IllConditionedError):
        lift(swap, pol, pol)


def test_oracle_bounds(rng):
    u = random_unitary(rng, 10)
    phi = _random_sea(rng, 10, 3)
    with pytest.raises(ValueError, match="oracle bounded"):
        oracle_lift(u, phi, phi)


def test_polarization_validation(rng):
    q = random_unitary(rng, 6)
    with pytest.raises(ValueError):
        PolarizationBasis(minus=q[:, :2], plus=q[:, 2:5])
    pol = PolarizationBasis(minus=q[:, :2], plus=q[:, 2:])
    eye = pol.projector_minus() + pol.projector_plus()
    assert np.allclose(eye, np.eye(6), atol=1e-12)
