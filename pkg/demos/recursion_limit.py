"""The deterministic recursion behind the innovation-rate limit.

f_n = (1 - 1/(c + a n)) f_{n-1} + b grows linearly with slope a b/(1+a).
With a = alpha*tau/B, b = B and c = e0/B it tracks the mean number of
distinct messages a synchronous botnet has sent after n slots.
"""
from botbuster.oracles import RecursionParams, closed_form, perturbed_bounds, recurse, slotted_botnet_params
from botbuster.synth import BotnetConfig, EmulationDictionary, Synchronous, generate_botnet_trace

p = RecursionParams(a=2.0, b=3.0, c=5.0, n_max=100_000)
rec, cf = recurse(p), closed_form(p)
print(f"limit a*b/(1+a) = {p.limit}")
for n in (10, 100, 1000, 10_000, 100_000):
    print(f"  n={n:>6}  f_n/n = {rec[n - 1] / n:.6f}   closed form {cf[n - 1] / n:.6f}")

hi, lo = perturbed_bounds(2.0, 3.0, lambda n: n ** 0.5, lambda n: n ** -0.5, n_max=200_000)
print(f"\nwith o(n) = sqrt(n), o(1) = 1/sqrt(n): f_n/n in [{lo:.4f}, {hi:.4f}] over the tail")

bots, alpha, e0 = 10, 10.0, 100
cfg = BotnetConfig(bots, Synchronous(1.0), EmulationDictionary(e0, alpha))
print("\nslotted botnet: mean distinct messages vs recursion")
for n in (20, 100, 500):
    sizes = [len(set(generate_botnet_trace(cfg, float(n), s).msgs.tolist())) for s in range(20)]
    pred = closed_form(slotted_botnet_params(alpha, 1.0, bots, e0, n), n)
    print(f"  n={n:>4}  simulated {sum(sizes) / len(sizes):8.1f}  recursion {pred:8.1f}")
