"""Two equally good arms: does training keep both alive?"""

# %%
from dmpo_bench.dmpo import DmpoConfig, target_distribution
from dmpo_bench.trainer import mode_collapse_probe, train_bandit

rewards = [1.0, 1.0, 0.8, 0.6, 0.4, 0.2]
cfg = DmpoConfig(lam=2.0, alpha=1 / 15)
print("target", target_distribution(rewards, cfg.alpha).round(4))

# %%
for objective in ("grpo", "dmpo"):
    for seed in range(3):
        pol, _ = train_bandit(rewards, cfg, 2000, lr=0.3, group_size=8, objective=objective, seed=seed)
        d = mode_collapse_probe(pol, rewards, cfg.alpha)
        a, b = d.optimum_mass
        print(f"{objective} seed {seed}: optimum masses {a:.3f} / {b:.3f}, TV to target {d.tv_global:.3f}")

# %% pure distribution matching over the full set converges to the target
pol, _ = train_bandit(rewards, DmpoConfig(pure_dm=True, alpha=1.0), 3000, lr=0.5)
print("pure DM, alpha=1: TV", mode_collapse_probe(pol, rewards, 1.0).tv_global)
