"""Why the index policy can lose track of a moving node.

The index of a node is (t + 1 - u) * |x2(u)|: time since its last update
times the slope it reported then. A node polled near the crest of its sine
reports a slope close to zero, so its index stays under the penalty for a
very long time while the true value keeps moving.
"""

import numpy as np

from aoiipoll import SimConfig, run

res = run(SimConfig(M=1, seed=0))
log = res.log
for i in range(5):
    got = np.flatnonzero(log.success[:, i])
    gaps = np.diff(np.r_[got, log.horizon])
    k = int(np.argmax(gaps))
    t0 = int(got[k])
    worst = np.max(np.abs(log.truth[t0:t0 + gaps[k], i] - log.estimate[t0:t0 + gaps[k], i]))
    print(f"node {i}: longest silence {gaps[k]:5d} steps from t={t0}, reported slope "
          f"{log.rx_x2[t0, i]:+.2e}, worst error in that stretch {worst:.2f}")
print(f"final penalty {log.penalty[-1]:.3f}, overall RMSE {res.summary.rmse:.3f}")
