"""Configuration, cache, outputs and the command-line entry point."""
from .config import RunConfig, dump_config, format_weight, load_config, parse_config, parse_weight

__all__ = ["RunConfig", "dump_config", "format_weight", "load_config", "parse_config", "parse_weight"]
