"""Detection curves for a mixed network.

Ten bots hide among ten normal users.  At every second the detector is run
on everything seen so far; eta_bot is the fraction of bots banned and
eta_nor the fraction of normal users banned, both averaged over trials.
Pass a trial count on the command line for smoother curves (default 20).
"""
import sys

import numpy as np

from botbuster.evaluation import evaluate_sweep
from botbuster.synth import SimConfig

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20
grid = np.arange(1.0, 121.0)
reports = evaluate_sweep(SimConfig(horizon=120.0), grid, [0.05, 0.1, 0.2], trials)

print(f"{trials} trials\n")
print(f"{'t':>5}" + "".join(f"  bot@{r.epsilon:<4} nor@{r.epsilon:<4}" for r in reports))
for t in (5, 10, 20, 40, 60, 90, 120):
    cells = "".join(f"  {r.at(t)[0]:8.3f} {r.at(t)[1]:8.3f}" for r in reports)
    print(f"{t:>5}{cells}")

# a larger epsilon moves the threshold toward rho_sum, banning bots sooner;
# normal users stay clear of it at every epsilon
