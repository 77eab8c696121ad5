"""Trains dense tabular intrusion-detection models, attacks them with
gradient-based evasion methods, and sweeps architectures to measure how
depth, feature count, activation, and dropout shape adversarial robustness."""

__version__ = "0.1.0"
