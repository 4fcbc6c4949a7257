"""Three memoryless agents on a directed circle, each seeing the same coin.

Each agent overwrites its own belief with its parent's updated belief, so
information travels round the circle. The per-agent rate is the pooled
rate divided by the circle length, which for identical agents equals the
private rate.

Run: python3 demos/02_circle_learning.py
"""
# %%
from lwrnet import Model, Network, SimConfig, classify, rate_study, simulate
from lwrnet.model import circle_rate_bracket, single_agent_rate

coin = [[0.7, 0.3], [0.3, 0.7]]
model = Model.from_arrays([0.5, 0.5], [coin] * 3)
net = Network((2, 0, 1))  # 0 -> 1 -> 2 -> 0
shape = classify(net)
print("circle", shape.circle_nodes)

# %% a short trajectory
traj = simulate(SimConfig(model, net, 0, 12, seed=7))
for t in range(0, 13, 3):
    print(f"t={t:2d}  " + "  ".join(f"{traj.belief(i, t)[0]:.3f}" for i in range(3)))

# %% rates
lo, pooled, hi = circle_rate_bracket(model, shape.circle_nodes, 0)
print(f"private {single_agent_rate(model, 0, 0):.5f}  circle {pooled:.5f}  bracket [{lo:.5f}, {hi:.5f}]")
rep = rate_study(model, net, 0, 5000, range(20))
for a in rep.agents:
    print(f"agent {a.agent}: empirical {a.empirical_mean:.5f}, bound {a.bound:.5f}")
