"""Deterministic in-process network simulation: simulated time, bounded
links, spine/leaf fabrics, heavy-tailed traffic, and capture replay."""

from .clock import Scheduler, SimClock
from .links import Host, Link
from .scenario import install_routes, load_scenario, mean_fct_by_class, run_scenario
from .topology import Fabric, build_spine_leaf
from .traffic import FlowSpec, TrafficProfile, bounded_pareto, classify

__all__ = [
    "Scheduler", "SimClock", "Host", "Link",
    "install_routes", "load_scenario", "mean_fct_by_class", "run_scenario",
    "Fabric", "build_spine_leaf",
    "FlowSpec", "TrafficProfile", "bounded_pareto", "classify",
]
