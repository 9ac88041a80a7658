"""Run artifacts on disk."""

from .artifact_store import INDEX_NAME, ArtifactStore

__all__ = ["ArtifactStore", "INDEX_NAME"]
