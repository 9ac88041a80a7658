"""Command-line front end."""

from .main import build_parser, load_config, main, run

__all__ = ["build_parser", "load_config", "main", "run"]
