"""On a path the root's rate is inherited by everyone downstream.

Followers relay the root's belief one step late and add their own signal,
but their extra information is overwritten on the next hop, so the
asymptotic rate is the root's private rate, not the pooled bound.

Run: python3 demos/04_leader_follower.py
"""
# %%
from lwrnet import Model, Network, rate_study

root = [[0.6, 0.4], [0.3, 0.7], [0.1, 0.9]]
P, Q = [0.8, 0.2], [0.2, 0.8]
model = Model.from_arrays([1 / 3] * 3, [root, [P, P, Q], [P, Q, P]])
net = Network((None, 0, 1))

rep = rate_study(model, net, 0, 3000, range(20))
print(f"{'agent':>5} {'private':>8} {'bound':>8} {'predicted':>9} {'empirical':>9}")
for a in rep.agents:
    print(f"{a.agent:>5} {a.private_rate:8.4f} {a.bound:8.4f} {a.predicted:9.4f} {a.empirical_mean:9.4f}")
