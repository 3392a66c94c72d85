"""
Running a benchmark grid
========================

A YAML config describes the data, mechanism, method, repeats and an
optional sweep.  The harness ampute-imputes-scores every (point, repeat)
cell from its own random stream, so two runs produce the same bytes.
"""
import os

from fsimpute import ExperimentConfig, emit_report, run_benchmark

here = os.path.dirname(os.path.abspath(__file__))
cfg = ExperimentConfig.load(os.path.join(here, "..", "configs", "benchmark_example.yaml"))

# the example config uses IFGAN; switch to the mean baseline for a quick look
cfg.method = "mean"
report = run_benchmark(cfg)
print(emit_report(report, "csv-summary").decode())

again = run_benchmark(cfg)
print("byte-identical:", emit_report(report) == emit_report(again))
