# %% [markdown]
# # Replicated simulation studies
#
# Small versions of the three studies shipped with the package; the CLI
# (`expsbm study1|study2|study3`) runs the full-size ones.

# %%
from expsbm.studies import study1, study2, study3

# %% [markdown]
# Study 1: Gamma(xi, xi) rates. Small xi spreads the block rates apart and
# recovery is easy; large xi makes them nearly equal.

# %%
res = study1(replicates=4, xis=(0.5, 50.0), N=60)
for row in res["summary"]:
    print("xi=%-5g mean ARI %.3f" % (row["xi"], row["mean_ari"]))

# %% [markdown]
# Study 3: the same community structure observed over shorter windows.

# %%
res = study3(replicates=4, Ts=(0.1, 1.0, 10.0), N=60)
for row in res["summary"]:
    print("T=%-5g mean ARI %.3f" % (row["T"], row["mean_ari"]))

# %% [markdown]
# Study 2: how often ICL picks the true number of groups.

# %%
res = study2(replicates=3, true_ks=(1, 2), k_max=4, N=60)
for row in res["confusion"]:
    print("true K=%d chosen correctly in %.0f%% of replicates" % (row["true_K"], 100 * row["correct"]))
