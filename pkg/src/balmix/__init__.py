"""Balanced-MixUp: mixing instance-sampled and class-sampled examples for
imbalanced classification, with sampling/loss baselines and ordinal metrics."""

from .data import Dataset, SplitSpec, generate_longtail, load_csv, one_hot, save_csv, stratified_split
from .losses import LossSpec, cb_loss, cb_weights, ce_soft, focal
from .metrics import EvalReport, bootstrap, evaluate
from .mixing import MixPolicy, balanced_mixup_batch, classic_mixup_batch, mixup_pair, sample_beta
from .model import TrainConfig, predict, train
from .sampling import SampleStream, SamplingStrategy, class_probabilities

__all__ = [
    "Dataset", "SplitSpec", "generate_longtail", "load_csv", "one_hot", "save_csv", "stratified_split",
    "LossSpec", "cb_loss", "cb_weights", "ce_soft", "focal",
    "EvalReport", "bootstrap", "evaluate",
    "MixPolicy", "balanced_mixup_batch", "classic_mixup_batch", "mixup_pair", "sample_beta",
    "TrainConfig", "predict", "train",
    "SampleStream", "SamplingStrategy", "class_probabilities",
]
