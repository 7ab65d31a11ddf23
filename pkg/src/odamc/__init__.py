"""Discrete-event simulator for multi-hop broadcast in vehicular ad-hoc networks."""

from .scenario import ScenarioConfig, parse, preset, render
from .simulation import RunResult, Simulation, run, run_static

__version__ = "0.1.0"

__all__ = ["RunResult", "ScenarioConfig", "Simulation", "parse", "preset", "render", "run",
           "run_static"]
