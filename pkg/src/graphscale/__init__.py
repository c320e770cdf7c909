"""Invariant graphs of chaotically driven concave fibre maps.

Compute the maximal invariant graph of a skew product x -> g(theta) h(x)
over an expanding Markov circle map, the pressure function of the
associated weighted transfer operator with its positive zero s*, and the
global and local scaling laws of the graph near its zero set.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateExponent, GraphscaleError,
                     InsufficientMass, InvalidParameter, ModeUnsupported,
                     NoConvergence, NonHolder, NoPositiveZero, NotConverged)
from .maps import (Branch, DrivenSystem, FiberMap, HyperbolicDriver,
                   HypothesisReport, MarkovIntervalMap, Multiplier,
                   PeriodicOrbit, affine_branch, apply_map, arctan_fiber,
                   baker_driver, baker_factor_map, baker_system, doubling_map,
                   find_periodic_orbits, full_branch_linear_map, make_fiber,
                   orbit_exponents, pc42_system, rational_fiber,
                   shifted_cosine_multiplier, t3_system, table_fiber,
                   tripling_map, validate_hypotheses)
from .graph import (GraphSample, ReducedMultiplier, compute_graph,
                    pullback_value, pullback_values_fixed, reduce_multiplier,
                    twosided_pullback, twosided_pullback_batch)
from .pressure import (PressureCurve, TransferMatrix, build_transfer_matrix,
                       find_sstar, pressure, spectral_radius,
                       stationary_masses)
from .scaling import (IndexPrediction, IndexReport, IndexRung, TailReport,
                      XiReport, birkhoff_exponents, global_xi,
                      local_sigma_empirical, predict_sigma, tail_exponent)
from .diagnostics import (AlphaSchedule, ConjugacyReport, DistortionReport,
                          SuiteReport, check_branch_distortion,
                          check_conjugacy_bound, check_graph_lower_bound,
                          distortion_suite)
from .config import (ExperimentConfig, SystemSpec, build_system, from_dict,
                     load_config, save_config, to_dict)
