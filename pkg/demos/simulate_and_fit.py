# %% [markdown]
# # Simulating and clustering interaction lengths
#
# Every pair of nodes alternates between interacting and not interacting.
# The lengths of both kinds of segments are exponential, with rates set by
# the groups of the two nodes. We sample such a network, fit the model and
# compare the estimated partition with the truth.

# %%
import numpy as np

from expsbm import GeneratorConfig, adjusted_rand_index, fit, make_community_params, sample_network

# %% [markdown]
# Three communities: within a group interactions are long (rate 0.5) and
# gaps short (rate 5); between groups the roles swap.

# %%
mu, nu = make_community_params(3, epsilon=0.5, theta=5.0)
config = GeneratorConfig(N=60, K=3, T=10.0, lam=np.full(3, 1 / 3), mu=mu, nu=nu, seed=1)
network, truth = sample_network(config)
print(network.n_pairs, "pairs observed on [0, %g]" % network.T)

tl = network.timeline(0, 1)
print("pair (0, 1) starts in state", tl.initial_state, "with", tl.W, "segments")

# %% [markdown]
# Variational EM from a spectral start.

# %%
result = fit(network, K=3)
print("converged:", result.converged, "after", result.n_iter, "iterations")
print("ELBO: %.4f" % result.elbo)
print("estimated interaction rates:\n", np.round(result.params.mu, 3))
print("ARI against the truth:", adjusted_rand_index(result.z_hat, truth))

# %% [markdown]
# With one group the model is homogeneous and the fit is closed form.

# %%
from expsbm import fit_homogeneous

hom = fit_homogeneous(network.stats_matrix())
single = fit(network, K=1)
print("closed form: mu=%.6f nu=%.6f" % (hom.mu_hat, hom.nu_hat))
print("K=1 fit:     mu=%.6f nu=%.6f" % (single.params.mu[0, 0], single.params.nu[0, 0]))
