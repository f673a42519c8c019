"""Desk-scale numerical laboratory for external-field QED on a 1+1D lattice,
with a 3+1D perturbative kernel engine for cutoff diagnostics."""

from .lattice import (DegeneracyError, GaussianPulse, LatticeConfig,
                      Potential1p1, SpinorField, UnitarityError, UnitaryMap,
                      charge_conjugation, conjugation_matrix_action, evolve,
                      free_hamiltonian, free_mode_basis, gauge_phase,
                      hamiltonian, spectral_projectors, spectral_subspaces)
from .kernel3p1 import (CutoffProbeResult, GaussianPulse4, Potential3p1,
                        SamplerSpec, cutoff_probe, fourier_potential,
                        hs_norm_squared, pair_kernel_element, tangential_probe)
from .polarization import (Projector, ShaleReport, blocks, build_Q,
                           class_distance, free_projectors, hs_norm,
                           key_prop_defects, local_gauge_projector,
                           representative_projector)
from .wedge import (IllConditionedError, LiftedEvolution, PolarizationBasis,
                    SeaBasis, amplitude, left_op, lift, oracle_lift, pairing,
                    right_op)
from .observables import (CurrentSample, GaugeProbeReport, PairSpectrum,
                          bogolyubov_current, free_polarization,
                          furry_polarization, gauge_covariance_probe,
                          pair_number, pair_spectrum, total_probability_check,
                          vacuum_persistence)

__version__ = "0.1.0"
