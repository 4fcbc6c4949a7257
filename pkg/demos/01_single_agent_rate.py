"""A single agent flipping a 0.7/0.3 coin learns at the KL rate.

Run: python3 demos/01_single_agent_rate.py
"""
# %%
import numpy as np

from lwrnet import Model, Network, kl_divergence, rate_study

coin = [[0.7, 0.3], [0.3, 0.7]]
model = Model.from_arrays([0.5, 0.5], [coin], state_labels=["good", "bad"])
net = Network((None,))

# %% theory: the false state is rejected at rate D(l(.|good) || l(.|bad))
R = kl_divergence(coin[0], coin[1])
print(f"KL rate          {R:.6f}")

# %% practice: slope of the log false/true ratio over 20 runs of length 5000
rep = rate_study(model, net, 0, 5000, range(20))
a = rep.agents[0]
rates = np.array([a.fits[s].rate for s in rep.seeds])
print(f"empirical mean   {rates.mean():.6f} +- {rates.std(ddof=1):.4f}")
print(f"relative error   {rates.mean() / R - 1:+.2%}")
print(f"worst r-squared  {min(a.fits[s].r_squared for s in rep.seeds):.4f}")
