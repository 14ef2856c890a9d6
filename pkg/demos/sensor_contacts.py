# %% [markdown]
# # From proximity contacts to interaction timelines
#
# Badges log a contact whenever two people are close during a 20 s slot.
# An interaction starts when 5 consecutive contacts of a pair span less
# than 300 s and ends when 5 consecutive contacts span more than that.

# %%
from expsbm import DetectionRule, build_network, detect_interactions, parse_contact_events
from expsbm.ingest import detect_all

# two bursts of contacts between badges 1 and 2, a short one between 2 and 3
rows = ["t,i,j"]
rows += ["%d,1,2" % t for t in range(0, 401, 20)]
rows += ["%d,2,1" % t for t in range(3000, 3401, 20)]
rows += ["%d,2,3" % t for t in (100, 120, 140)]
events = parse_contact_events(rows)
print({pair: ts.size for pair, ts in events.items()})

# %%
rule = DetectionRule(window=5, span_threshold=300.0, min_contacts=5)
for pair, ts in events.items():
    print(pair, detect_interactions(ts, rule))

# %% [markdown]
# The dense-gap-dense case: the interval opened at 0 closes at the first
# contact of the first window that stretches over the gap.

# %%
print(detect_interactions([0, 20, 40, 60, 80, 1000, 1020, 1040, 1060, 1080]))

# %% [markdown]
# Node ids in the file are 1-based; the network uses 0-based ids.

# %%
intervals = {(i - 1, j - 1): ivs for (i, j), ivs in detect_all(events, rule).items()}
network = build_network(intervals, N=3, T=3600.0)
for pair in network.pairs():
    print(pair, network.timeline(*pair))
