"""Exponential random graph models: simulation, classical and Bayesian inference."""
from .graph import Dyad, Graph, new_graph
from .statistics import ModelSpec, StatisticTerm, change_stats, global_stats
from .sampler import SamplerConfig, sample_graph, stats_trace
from .classical import FitResult, mcmle, mple
from .exchange import ExchangeConfig, Prior, run_exchange
from .population import PopulationConfig, run_population
from .diagnostics import autocorrelation, effective_sample_size, summarize
from .gof import bayesian_gof
from .io import load_dataset, load_graph, save_graph

__version__ = "0.1.0"
