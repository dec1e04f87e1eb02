"""Shapley values, Integrated Gradients with coalition baselines, and the
experiments that compare them."""

from .game import Coalition, Game, coalition_weight, marginal_contribution, shapley_exact
from .ig import (AttributionResult, BaselineSpec, PlayerMap, attribute, integrated_gradients,
                 sig_attribute)
from .metrics import MetricReport, aggregate, iaccuracy, spearman
from .micronet import MicroNet, TrainConfig, forward, input_gradient, train
from .sampling import mc_shapley_proportional, sample_coalitions, sample_coalitions_two_stage

__all__ = [
    "AttributionResult", "BaselineSpec", "Coalition", "Game", "MetricReport", "MicroNet",
    "PlayerMap", "TrainConfig", "aggregate", "attribute", "coalition_weight", "forward",
    "iaccuracy", "input_gradient", "integrated_gradients", "marginal_contribution",
    "mc_shapley_proportional", "sample_coalitions", "sample_coalitions_two_stage",
    "shapley_exact", "sig_attribute", "spearman", "train",
]
__version__ = "0.1.0"
