"""Two knobs: the activation penalty and the fairness window.

A larger penalty makes each poll more expensive, so fewer are sent. A
shorter fairness window forces quiet nodes back into the schedule.
"""

from dataclasses import replace

import numpy as np

from aoiipoll import SimConfig, WhittleConfig, run

seeds = range(3)

print("penalty sweep, M=5 (packets as % of round robin)")
for lam in (0.1, 0.25, 0.5):
    pct, err = [], []
    for seed in seeds:
        cfg = SimConfig(M=5, seed=seed, whittle=WhittleConfig(penalty=lam))
        rr = run(replace(cfg, policy="rr")).summary.total_packets
        s = run(cfg).summary
        pct.append(100 * s.total_packets / rr)
        err.append(s.rmse)
    print(f"  lambda={lam:<5} packets {np.mean(pct):5.1f}%  RMSE {np.mean(err):.3f}")

print("\nfairness window sweep, M=1")
for eta in (100, 300, 500):
    runs = [run(SimConfig(M=1, seed=s, policy="fwaoii", whittle=WhittleConfig(eta=float(eta)))).summary
            for s in seeds]
    share_b = np.mean([r.poll_share[1] for r in runs])
    print(f"  eta={eta:<4} B share {share_b:5.1f}%  RMSE {np.mean([r.rmse for r in runs]):.3f}")
