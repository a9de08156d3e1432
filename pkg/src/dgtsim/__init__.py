"""Gradient-tracking distributed optimization over digraphs with sharing noise."""

from .diagnostics import AggregateReport, TraceRecord, aggregate, metrics_for_round
from .engine import AlgorithmKind, NetworkState, init_state, run_trial, step_alg1, \
    step_alg2, step_pushpull_noisy
from .errors import (AggregationError, ConfigError, DegenerateProblemError, DgtsimError,
                     DivergenceError, EstimatorDegeneracyError, GraphConditionError,
                     NumericalFailureError)
from .graph import (Digraph, WeightPair, build_ring_plus_random, check_spanning_tree_of_transpose,
                    check_strongly_connected, perron_left, perron_right, spectral_diagnostics,
                    weights_from_digraph)
from .noise import NoiseDraw, SharingNoiseModel, SigmaSchedule, TrialStreams, sample_round, \
    weighted_noise
from .problem import GradientOracle, RidgeProblem, generate_ridge, local_gradient, \
    sample_gradient
from .schedule import SchedulePoint, ScheduleSpec, ValidationReport, evaluate, gamma_max, validate

__version__ = "0.1.0"
