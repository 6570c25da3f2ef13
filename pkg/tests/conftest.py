"""Shared pytest configuration (anchors sys.path for the helpers module)."""
