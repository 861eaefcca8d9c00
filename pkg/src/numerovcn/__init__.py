"""Compact implicit scheme for the 1D time-dependent Schrodinger equation on
non-uniform meshes: mesh replication, pencil spectra, per-mode stability
calculus and the packet reproduction experiments."""

__version__ = "0.1.0"

from .mesh import Mesh, MeshError, ReplicationSpec, extend, mesh_from_steps, replicate
from .operators import (NumerovWeights, Pencil, apply_neg_laplacian, apply_numerov,
                        assemble_pencil, inner_product, norm, numerov_weights,
                        weights_nonnegative)
from .eigen import (EigenPair, EigenSolveError, SpectrumReport, check_proposition1,
                    generalized_eigenvalues, pencil_residual)
from .stability import (NecessaryConstants, PhysicalParams, PoleError, StabilityParams,
                        amplification_factor, growth_factor_sq, min_kappa,
                        necessary_condition, rewritten_condition, spectral_condition)
from .solver import (FOLD_FULL, FOLD_LAPLACIAN, RunReport, SchemeRun,
                     SingularSystemError, mass_norm, ncn_step, run_simulation)
from .experiments import (ConvergenceCase, PacketParams, UnstableClusterFilter,
                          convergence_rates, convergence_study, default_base_mesh,
                          find_optimal_M, gaussian_packet, mass_sweep, max_error,
                          prepare_packet_run)
