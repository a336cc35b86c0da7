"""Configuration, sweeps, seeding strategies, CSV output and the CLI."""

from pvqvoter.harness.config import (Config, NetworkMode, SeedingSpec, SeedingStrategy,
                                     SweepGrid, load_config)
from pvqvoter.harness.csvio import StationaryRecord, write_csv
from pvqvoter.harness.seeding import apply_seeding, top_degree_agents
from pvqvoter.harness.sweep import CellResult, SweepResult, run_replication, run_sweep

__all__ = [
    "Config", "NetworkMode", "SeedingSpec", "SeedingStrategy", "SweepGrid", "load_config",
    "StationaryRecord", "write_csv", "apply_seeding", "top_degree_agents",
    "CellResult", "SweepResult", "run_replication", "run_sweep",
]
