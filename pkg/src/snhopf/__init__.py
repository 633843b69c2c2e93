"""Equivariant normal forms and realizability for scalar delay equations at
a saddle-node/multi-Hopf interaction.

The package splits into graded polynomial spaces (``poly``), the group
actions and projections (``symmetry``), the homological solver
(``homological``), the linear delay analysis (``spectral``), the delay
lifts and realizability solvers (``realize``), the normal-form engine
(``engine``), and the CLI (``cli``).
"""

__version__ = "0.1.0"

from .engine import (NormalFormOutput, OdeJet, PolarSystem, RfdeModel,
                     SnHopfCoefficients, normal_form, polar_decouple,
                     reduce_to_ode, saddle_node_hopf_example)
from .errors import (HypothesisError, NumericalError, ParseError,
                     PreconditionError, RankDeficiencyError, SnhopfError)
from .homological import (HomologicalMatrix, SplittingReport,
                          apply_homological, homological_matrix,
                          solve_homological, verify_splitting)
from .poly import (Monomial, SpaceDesc, VectorPoly, check_reality,
                   compose_linear, enumerate_basis, split_parameter)
from .realize import (CompositeMatrix, DelayTuple, RankScanReport,
                      RealizationResult, UnfoldingResult, composite_matrix,
                      delay_evaluation_matrices, embed_plain, lift_to_center,
                      rank_scan, realize_jet, realize_unfolding, restrict_w,
                      sample_delays)
from .spectral import (DelayKernel, HypothesisReport, RootScan, SpectralData,
                       analyze_kernel, char_derivative, char_value,
                       design_kernel, eigenfunction_pairing,
                       find_imaginary_roots, projection_weights,
                       verify_hypothesis)
from .symmetry import (RadialJet, angular_part, equivariant_basis,
                       project_equivariant, project_equivariant_nu0,
                       radial_part, time_average)
