"""Relative-entropy distributionally robust prediction and its large-deviation guarantees."""

from .errors import BudgetError, DomainError, InputError
from .simplex import CostMatrix, Distribution, SimplexGrid, ball_boundary, empirical_distribution
from .divergences import entropy, pearson_divergence, relative_entropy
from .predictors import (
    DRO, Markowitz, Pearson, PredictorKind, ReverseDRO, SampleAverage, DualCertificate,
    dro_predictor, markowitz_predictor, pearson_predictor, predict, prescriptor,
    reverse_predictor, sample_average, sample_complexity,
)
from .ldp import disappointment_curve, exact_disappointment, fit_decay_rate, strong_bound
from .conic import exp_cone_member, geometric_mean_certificate, verify_exp_cone_solution

__version__ = "0.1.0"
