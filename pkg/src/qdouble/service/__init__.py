"""The experiment service (FastAPI app and its schemas)."""
