"""No agent can tell the state alone, yet a circle of them can.

Agent 0 cannot separate a from b, agent 1 cannot separate a from c, agent 2
cannot separate b from c. In isolation agent 0 stalls at (1/2, 1/2, 0); on
a circle the three learn the truth.

Run: python3 demos/03_identification.py
"""
# %%
from lwrnet import Model, Network, SimConfig, classify, simulate
from lwrnet.analysis import check_limit
from lwrnet.model import equivalence_set, group_rate

P, Q = [0.8, 0.2], [0.2, 0.8]
liks = [[P, P, Q], [P, Q, P], [P, Q, Q]]
model = Model.from_arrays([1 / 3] * 3, liks, state_labels=["a", "b", "c"])

for i in range(3):
    print(f"agent {i} confuses a with {sorted(equivalence_set(model, i, 0))}")

# %% alone
solo = model.restrict([0])
net = Network((None,))
traj = simulate(SimConfig(solo, net, 0, 3000, seed=4000))
row = check_limit(traj, solo, net, classify(net), 0, 0)
print("isolated tail", row.tail_mean.round(4), "predicted", row.predicted.round(4))

# %% together
circle = Network((2, 0, 1))
traj = simulate(SimConfig(model, circle, 0, 3000, seed=3000))
print(f"circle rate {group_rate(model, [0, 1, 2], 0) / 3:.4f}")
for i in range(3):
    print(f"agent {i}: mass on a at T = {traj.belief(i, 3000)[0]:.6f}")
