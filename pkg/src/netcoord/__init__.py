"""Simulator and benchmark harness for coordination tasks on agent networks."""

__version__ = "0.1.0"
