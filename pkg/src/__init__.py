"""
markov-zo: accelerated zero-order optimization under Markovian noise

A modular toolkit for gradient-free minimisation with noisy function values:
- chains: lazy Gaussian noise chains and mixing-time diagnostics
- problems: test objectives, hard instances and zero-order oracles
- estimators: finite-difference and multilevel Monte-Carlo gradient estimators
- optimizer: the accelerated method, tuning rules and restarts
- diagnostics: Monte-Carlo verification suites
- experiments / analysis / cli: grids, heatmaps and the command line
"""

__version__ = "0.1.0"
__author__ = "Quantitative Research Team"
