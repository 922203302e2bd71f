"""ctpfield: decoherence and wave-particle duality of two detectors
coupled to a free massive scalar field, from closed-time-path influence
functionals, with every closed form validated against brute-force oracles.
"""
from ._core import BACKEND_NAME, USING_COMPILED
from .greens import FieldParams, RetardedKernelValue, keldysh_mode_weight, omega, retarded_kernel
from .influence import (ExperimentSetup, InfluenceFunctional,
                        KeldyshBranchIndices, compute_influence, iW_value,
                        keldysh_pairing, retarded_pairing)
from .numerics import QuadratureSpec, adaptive_quad, bessel_j1, erf_fn, oscillatory_tail_quad
from .observables import (DualityReport, GaussianDistribution,
                          distinguishability_threshold, duality_report,
                          meter_distribution, optimal_epsilon, overlap,
                          particle_number, two_level_trace_distance)
from .oracle import MomentumLattice, lattice_pairing, meter_moment_oracle, pi_integral_overlap
from .protocols import (CouplingProtocol, alice_protocol, bob_protocol,
                        bob_protocol_smoothed, cross_correlation,
                        fourier_transform, zero_protocol)

__version__ = "0.1.0"
