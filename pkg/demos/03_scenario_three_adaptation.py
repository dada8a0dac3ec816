"""Scenario Three: the two categories swap behaviour at t = 5000.

Before the swap A moves and B is still; afterwards the roles flip. The
question is how quickly each policy moves its polls to the new mover.
"""

from aoiipoll import SimConfig, WhittleConfig, run
from aoiipoll.suites import phase_shares
from aoiipoll.world import scenario_three

spec = scenario_three(10_000)
for name, wcfg in (("waoii", WhittleConfig()), ("fwaoii", WhittleConfig(eta=100.0))):
    res = run(SimConfig(M=1, seed=0, policy=name, scenario=spec, whittle=wcfg))
    shares = phase_shares(res)
    cells = "  ".join(f"[{w}) {v:5.1f}%" for w, v in shares.items())
    print(f"{name:7s} share of polls to category B: {cells}")

# In this simulator B keeps a small nonzero rate estimate from its noise, so
# its index keeps growing while unpolled and plain WAoII picks up the change
# within a few hundred steps. The fairness window adds a steady trickle of
# polls to the now quiet A nodes, which lowers FWAoII's share to B.
