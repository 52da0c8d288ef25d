"""
Accuracy across load
--------------------

Scale all arrival rates of a four-server, two-class system with Erlang and
hyperexponential service and watch the gap between the approximation and
simulation open up as the servers saturate.
"""

import numpy as np

from prioloss import ErlangK, Hyperexponential, SimConfig, SystemModel, analyze, run

base = [(1.0, ErlangK(3, 3.0)), (2.0, Hyperexponential(((0.3, 0.4), (0.7, 4.0))))]
cfg = SimConfig(arrivals=200_000, replications=10, seed=1)

print(" scale   gamma_2 approx   gamma_2 simulated        +/-")
for scale in (0.25, 0.5, 1.0, 2.0, 4.0):
    model = SystemModel.build(4, [(rate * scale, svc) for rate, svc in base])
    ana = analyze(model)
    sim = run(model, cfg)
    print(f"{scale:6.2f}   {ana.gamma[1]:14.5f}   {sim.gamma_hat[1]:17.5f}   {sim.gamma_halfwidth[1]:8.5f}")

###############################################################################
# The Erlang-B limit: with a common exponential law the blocking
# probabilities collapse onto the classical loss formula.

from prioloss import Exponential, erlang_b  # noqa: E402
from prioloss.model import cumulative_loads  # noqa: E402

model = SystemModel.build(4, [(1.0, Exponential(0.8)), (2.0, Exponential(0.8))])
print(np.round(analyze(model).c, 8), np.round([erlang_b(4, a) for a in cumulative_loads(model)], 8))
