"""Noncompactness measures for sets and operators in ``A^N`` over a
finite-dimensional C*-algebra ``A``."""

from .algebra import (AlgebraDesc, AlgebraElement, NotInvertibleError, ShapeError, State, arithmetic,
                      conjugate_state, norm, positivity, random_sample, state_eval)
from .measures import (MncEstimate, MncParams, TailProfile, greedy_cover, greedy_packing, lambda_profile,
                       op_mnc, seminorm_mnc_all, seminorm_mnc_bounds, star_aggregate, star_aggregate_all)
from .module import (ModuleOperator, ModuleVector, inner_product, op_norm, operator_algebra, random_operator,
                     random_vector, submodule_project, tail, tail_op_norm, theta, truncate, vec_norm)
from .seminorm import SemiNorm, make_seminorm, random_seminorm, seminorm_eval, transform_seminorm
from .sets import (Ball, BalancedHull, ConvexHull, Finite, IntersectFinite, Interval, OperatorImage, RightMul,
                   Scale, SetExpr, Sum, Translate, Union, build, expr_from_dict, hausdorff, sample, sup_norm,
                   tail_intervals, tail_norm)
from .suite import Report, SuiteConfig, run_suite
from .witness import DiscreteWitness, PrecompactError, WitnessSearchError, discrete_witness

__version__ = "0.1.0"
