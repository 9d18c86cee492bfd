"""pzid: pole-zero identification for linearized-circuit stability analysis.

Fit rational models to sampled frequency responses, read stability off the
fitted pole map, localize instabilities through residue analysis, and run
parametric stabilization studies — with a built-in linear-circuit engine
whose generalized-eigenvalue pencil serves as an analytic oracle.
"""

from .errors import NumericError, PzidError, UsageError
from .freqresp import (FrequencyGrid, FrequencyResponseSet, PortLabel,
                       ResponseParseError, emit_csv, merge_sets, parse_csv,
                       parse_touchstone, slice_band)
from .netsim import (Element, Netlist, PencilEigenvalues, ProbeSpec,
                     TerminationPort, analytic_poles, capacitor, current_probe,
                     frequency_response, frequency_responses, ground_node,
                     inductor, modal_probe, parse_netlist, parse_probe,
                     parse_value, pencil_eigenvalues, resistor,
                     set_element_value, vccs, voltage_probe, with_termination)
from .polemap import PoleMapStyle, render_pole_map
from .ratfit import (FitConfig, FitReport, PartialFractionModel, PolePair,
                     PolynomialRatioModel, RankDeficiencyError, evaluate_model,
                     fit_common_denominator, fit_error, fit_polynomial_ratio,
                     load_model, poles_and_zeros, save_model)
from .staban import (ClassifiedPole, QuasiCancellation, RhoMatrix,
                     StabilityConfig, StabilityVerdict, auto_identify,
                     classify_poles, detect_quasi_cancellations, rank_ports,
                     rho_factor, rho_matrix, serialize_verdict,
                     subband_consistency_check)
from .sweeps import (PoleCloud, PoleTrajectory, ProvisoReport, SpiralPath,
                     SweepConfig, monte_carlo_cloud, proviso_scan, spiral_path,
                     stabilization_threshold, trace_pole_locus)

__version__ = "0.1.0"
