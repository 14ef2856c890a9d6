"""Exponential stochastic blockmodel for interaction lengths in continuous time.

Nodes belong to latent groups; the lengths of interactions and of the gaps
between them are exponential with rates that depend on the groups of the
two endpoints. Inference is by variational EM with closed-form updates,
and the number of groups is chosen by the integrated completed likelihood.
"""
from .errors import NumericalError, ValidationError
from .homogeneous import HomogeneousFit, fit_homogeneous
from .ingest import DetectionRule, build_network, detect_interactions, parse_contact_events
from .metrics import adjusted_rand_index
from .sampler import (GeneratorConfig, make_community_params, sample_alternating_lengths,
                      sample_network, sample_study1_params)
from .selection import SelectionReport, completed_loglik, icl, select_k
from .spectral import affinity, spectral_init, spectral_kmeans, total_interaction_matrix
from .timeline import (EdgeTimeline, NetworkData, PairStats, PairStatsMatrix, compute_pair_stats,
                       from_events, pair_log_density)
from .vem import (BlockParams, FitOptions, FitResult, elbo, fit, map_partition, omega, update_lambda,
                  update_rates, update_tau)

__version__ = "0.1.0"
