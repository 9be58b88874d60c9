"""
Links that come and go
======================

Run the same experiment with edges active 85% and 10% of the time and
compare how long the agents take to agree within 0.5.
"""

from beliefavg.harness import ExperimentConfig, run_experiment

for scenario in ("undirected-dynamic", "directed-dynamic"):
    for p in (0.85, 0.1):
        cfg = ExperimentConfig(scenario=scenario, p=p, n=10, T=2000, repetitions=5, seed=1)
        s = run_experiment(cfg)
        times = [r.time_to_threshold for r in s.reps]
        print(f"{scenario:<19} p={p:<5} time to spread < 0.5: {times}")
