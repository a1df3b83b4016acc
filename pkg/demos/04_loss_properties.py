"""GRPO and distribution-matching losses on a hand-built group."""

# %%
import numpy as np

from dmpo_bench.dmpo import (
    DmpoConfig, TrajectoryGroup, dmpo_loss, group_advantages, q_lower_bound,
    target_distribution,
)
from dmpo_bench.policy import BanditPolicy

# %% the Boltzmann target sharpens as alpha shrinks
r = [1.0, 0.9, 0.5, 0.2]
for alpha in (1.0, 0.2, 1 / 15):
    print(f"alpha={alpha:.3f}", np.round(target_distribution(r, alpha), 4))
print("advantages", np.round(group_advantages(r), 4))

# %% a group from a softmax bandit: each arm is a one-step trajectory
pol = BanditPolicy(np.array([0.8, 0.1, -0.3, 0.0]))
logp = tuple((pol.log_prob_and_grad(a)[0],) for a in range(4))
grads = np.array([pol.log_prob_and_grad(a)[1] for a in range(4)])
group = TrajectoryGroup(rewards=tuple(r), logp=logp, old_logp=logp, grad_logp=grads)

for lam in (0.0, 2.0):
    rep = dmpo_loss(group, DmpoConfig(lam=lam))
    print(f"lam={lam}: total={rep.total:.5f} dm={rep.dm_term:.5f} grad={np.round(rep.grad, 4)}")

# %% every q_i stays above p_i - sqrt(G * L_DM)
rep = dmpo_loss(group, DmpoConfig())
print("q     ", np.round(rep.q, 4))
print("bound ", np.round(q_lower_bound(rep.p, rep.dm_term), 4))

# %% equal rewards: GRPO has no signal, the DM term still pulls q toward uniform
flat = TrajectoryGroup(rewards=(0.5,) * 4, logp=logp, old_logp=logp, grad_logp=grads)
rep = dmpo_loss(flat, DmpoConfig())
print("flat group grad", np.round(rep.grad, 5))
