"""The pairwise test on three kinds of pairs.

For each pair the script prints the observed union innovation rate next to
the two references: rho_bot (what a single botnet would produce) and
rho_sum (what two independent groups would produce).  The threshold gamma
sits 20% of the way from the first to the second.
"""
from botbuster.rr import bic_trace
from botbuster.synth import BotnetConfig, NormalConfig, SimConfig

sim = SimConfig(BotnetConfig(10), NormalConfig(count=2), horizon=300.0, shuffle=False)
trace, labels = sim.generate(seed=1)

pairs = {
    "bots 0-4 vs bots 5-9": (range(5), range(5, 10)),
    "bots 0-4 vs normal 10": (range(5), [10]),
    "normal 10 vs normal 11": ([10], [11]),
}

print(f"{'pair':<24} {'t':>5} {'rho_union':>10} {'rho_bot':>8} {'gamma':>8} {'rho_sum':>8}  decision")
for name, (s1, s2) in pairs.items():
    for t in (30.0, 300.0):
        decision, rho_u, sol = bic_trace(trace, s1, s2, t)
        print(f"{name:<24} {t:5.0f} {rho_u:10.3f} {sol.rho_bot:8.3f} {sol.gamma:8.3f} "
              f"{sol.rho_sum:8.3f}  {decision.value}")
