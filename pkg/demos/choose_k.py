# %% [markdown]
# # Choosing the number of groups
#
# Each candidate K is fitted and scored with the integrated completed
# likelihood (ICL), which penalises the completed log-likelihood of the
# MAP partition by the number of parameters.

# %%
import numpy as np

from expsbm import GeneratorConfig, make_community_params, sample_network, select_k

mu, nu = make_community_params(2, epsilon=0.5, theta=5.0)
network, truth = sample_network(GeneratorConfig(80, 2, 10.0, [0.5, 0.5], mu, nu, seed=4))

# %%
report = select_k(network, k_min=1, k_max=5)
print(report.table())
print("selected K =", report.best_K)

# %% [markdown]
# ICL values of all candidates, relative to the best one.

# %%
icl = np.array([r.icl for r in report.records])
print(np.round(icl - icl.max(), 2))
