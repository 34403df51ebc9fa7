# A miniature version of the benchmark table: a few seeded runs per instance.
# The same thing from the shell:  gtsp-bls bench --config bench.cfg --format markdown

from gtsp_bls.bench import BenchConfig, run_benchmark

cfg = BenchConfig(instances=["11eil51", "14st70", "16pr76", "20kroA100"], runs=3, seed=1, time_limit=60)
report = run_benchmark(cfg)
print(report.to_markdown())

# %% individual runs, with the serialized tours that were re-validated
print(report.runs_csv().splitlines()[0])
for line in report.runs_csv().splitlines()[1:4]:
    print(line[:110] + " ...")
