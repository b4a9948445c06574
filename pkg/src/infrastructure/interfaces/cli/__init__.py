"""CLI interfaces for structeval."""
