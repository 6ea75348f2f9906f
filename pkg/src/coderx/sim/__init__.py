"""Seeded BER sweeps, CSV output and the command line."""

from .cli import cli_main
from .config import (FORMULATIONS, PROFILES, RECEIVERS, CodeSpec, ConfigError, SimConfig,
                     config_from_dict, config_to_dict, load_config)
from .report import CSV_HEADER, BerRecord, emit_csv, parse_csv
from .runner import SweepContext, frame_errors, generate_frame, run_ber_sweep

__all__ = [
    "CSV_HEADER", "FORMULATIONS", "PROFILES", "RECEIVERS", "BerRecord", "CodeSpec", "ConfigError",
    "SimConfig", "SweepContext", "cli_main", "config_from_dict", "config_to_dict", "emit_csv",
    "frame_errors", "generate_frame", "load_config", "parse_csv", "run_ber_sweep",
]
