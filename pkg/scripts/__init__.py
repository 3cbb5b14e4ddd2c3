"""
Entry point scripts for the FedSketch experiments.

This package contains:
- run_experiment.py: run, sweep-k, effdim and validate-config verbs
"""
