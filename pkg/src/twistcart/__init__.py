"""Exact-arithmetic workbench for twisted equivariant cohomology of
finite Cartan-model complexes, with generalized-complex linear algebra
and a finite-difference checker for pseudo-holomorphic pairs."""

from .errors import (TwistcartError, InputError, DimensionMismatch,
                     NotContained, InvalidComplex, InvalidModel,
                     InvalidContraction, NotClosed, UnstableWindow,
                     WindowTooSmall, ZeroWeight, NotGC, NotIsotropic,
                     NotTransverse, InvalidTriple, NotCommuting, NotPositive,
                     NotConstantModel, GridTooSmall, NotPositiveAtCenter,
                     BallOutOfRange)
from .linalg import (QQ, GaussianRational, SparseMatrix, Subspace, rank,
                     kernel_basis, image_basis, quotient_dim, solve, det)
from .dg import (GradedSpace, CochainComplex, ChainMap, ConePair,
                 cohomology, mapping_cone, is_quasi_iso)
from .cartan import (CDGAModel, CartanComplex, Twisting, CartanPair,
                     ModelMap, TwistedCohomology, build_cartan, is_closed,
                     zero_twisting, twisted_cohomology,
                     relative_twisted_cohomology, exp_b_transform,
                     euler_mult_injectivity, six_term_check,
                     exactness_witness, closed_degree3_space,
                     untwisted_graded_dims)
from .spectral import (Filtration, SpectralPage, make_filtration, pages,
                       collapse_page, convergence_check, cofinality_check,
                       formality_test, pages_report_json)
from .gc import (SplitSpace, GCStructure, IsotropicSubspace, GKTriple,
                 HamiltonianPointData, pairing, is_gc, gc_structure,
                 i_eigenspace, gc_from_isotropic, b_transform,
                 gk_from_triple, extract_bihermitian, poisson_bivector,
                 moment_residual, ham_eq_relations, hessian_identity,
                 compatibility_check, courant_bracket_const, metric_gram)
from .elliptic import (ChartGrid, AlmostComplexField, ScalarPairField,
                       rc_residual, elliptic_coefficients,
                       positive_definite_region, max_principle_check,
                       operator_residual, standard_j, constant_j_field,
                       square_grid, sample_pair)
from . import corpus

__version__ = "0.1.0"
