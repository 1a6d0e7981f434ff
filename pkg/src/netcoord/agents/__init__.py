"""Agent backends: scripted algorithms, a random baseline and a remote chat model."""

from .baseline import RandomBaselineAgent, random_baseline_agent
from .remote import RemoteModelAgent, RemoteModelConfig, Usage, remote_model_agent
from .scripted import (
    scripted_agent,
    scripted_coloring_agent,
    scripted_consensus_agent,
    scripted_leader_agent,
    scripted_matching_agent,
    scripted_vertex_cover_agent,
)

__all__ = [
    "RandomBaselineAgent",
    "RemoteModelAgent",
    "RemoteModelConfig",
    "Usage",
    "random_baseline_agent",
    "remote_model_agent",
    "scripted_agent",
    "scripted_coloring_agent",
    "scripted_consensus_agent",
    "scripted_leader_agent",
    "scripted_matching_agent",
    "scripted_vertex_cover_agent",
]
