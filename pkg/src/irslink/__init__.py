"""Simulator and phase-shift optimizer for IRS-aided ultra-wideband links."""

from .geometry import (SPEED_OF_LIGHT, ArraySpec, GeometryError, ImagePaths,
                       IrsSpec, ReflectorSpec, Scenario, build_scenario,
                       image_paths, load_scenario, save_scenario,
                       scenario_from_dict, scenario_to_dict, steering_angle,
                       two_hop_layout)
from .channel import (AbsorptionTable, ApproxChannelModel, ChannelModel,
                      ChannelSlice, IrsResponse, ShadowingModel,
                      approx_small_array_channel, element_channel, irs_zeta,
                      multipath_matrix)
from .spectrum import (BeamSpec, ConfigError, FrequencyGrid, PsdBundle,
                       SpectrumSpec, beamformer, build_psd, flat_spectrum,
                       make_beam, random_allocation)
from .coupling import (Coupling, ContractViolation, MemoryLimitError,
                       PhaseConfig, assemble_coupling, direct_received_power,
                       load_coupling, quadratic_objective, received_power,
                       save_coupling)
from .solvers import (NbConditionReport, NbDelays, SolverError, SolverReport,
                      brute_force_oracle, dominant_eigenvalue_bound,
                      linear_nb_threshold, max_eig_phase, nb_condition_check,
                      nb_config, nb_max_power, nb_optimum, power_iteration,
                      relaxed_power_bound, subband_received_powers, ucqp_ascent,
                      worst_case_fractional_bandwidth)
from .rate_bounds import (BoundInputs, BoundReport, RateReport, achievable_rate,
                          bound_inputs, evaluate_rates, rank_bound_node,
                          upper_bound)
from .experiments import (ExperimentConfig, ResultRow, ScenarioConfig,
                          experiment_config_from_dict, experiment_config_to_dict,
                          load_experiment_config, oracle_check, presets,
                          resolve_preset, run_experiment, save_experiment_config,
                          write_csv, write_solver_reports)

__version__ = "0.1.0"
