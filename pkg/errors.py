"""
Exceptions raised by the simulation library and the CLI.
Every class carries the exit code used by main.py.
"""

from typing import List, Optional


class FracmapError(Exception):
    exit_code = 1


class DomainError(FracmapError, ValueError):
    """A parameter lies outside its mathematical domain."""
    exit_code = 2


class SizeError(DomainError):
    """Lattice too small for the requested topology."""


class ShapeError(FracmapError, ValueError):
    exit_code = 1


class InsufficientDataError(FracmapError, ValueError):
    exit_code = 1


class ConfigError(FracmapError):
    """Holds every violation found while validating a config, not just the first."""
    exit_code = 2

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ExportError(FracmapError, OSError):
    exit_code = 3

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")


class DivergenceError(FracmapError):
    exit_code = 4

    def __init__(self, site: Optional[int], time: Optional[int]):
        self.site = site
        self.time = time
        super().__init__(f"run diverged at site {site}, t={time}")
