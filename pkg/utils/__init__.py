"""Package init."""
