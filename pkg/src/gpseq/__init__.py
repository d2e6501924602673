"""Gaussian-process emulation and sequential design of computer experiments.

Provides stationary kernels, constant-mean BLUP prediction, profile
likelihood maximization, space-filling samplers, the ALM/ALC/MI/MICE
selection criteria, a sequential-design driver, standard test functions,
and a benchmark harness with CLI.
"""

from .exceptions import (AllInfeasible, CholeskyFailure, ConfigError,
                         DegenerateAugmentation, EmptyPool, GpseqError,
                         NonGridQuery, NumericalBreakdown, SizeOverflow)
from .gp import (Design, GpModel, deletion_inverse_update, entropy, fit,
                 rank_one_inverse_update, variance_bound_constants)
from .kernels import (Family, KernelSpec, correlation, correlation_matrix,
                      cross_correlation_matrix, cross_correlation_vector)
from .likelihood import (MleConfig, MleResult, maximize_likelihood,
                         profile_negloglik, should_update)
from .sampling import (CandidatePool, candidate_pool_for_step,
                       fixed_grid_pool, latin_hypercube, maximin_lhd,
                       minimax_lhd, regular_grid, sample_grf_realization)
from .criteria import (CriterionScoreSheet, complement_variances, score_alc,
                       score_alm, score_mi, score_mice)
from .seq_design import (FixedPool, RunRecord, SequentialConfig, StepRecord,
                         run_one_shot, run_sequential)
from .testbed import (BoxDomain, BRANIN_DOMAIN, OSC4_C, OSC4_W, OSC8_C,
                      OSC8_W, PISTON_DOMAIN, eval_branin, eval_oscillatory,
                      eval_piston, make_grf_objective, make_objective)
from .bench import (ArmSpec, ExperimentConfig, ResultTable, parse_arm, rmspe,
                    run_experiment, score_field_dump, timing_report)

__version__ = "0.1.0"
