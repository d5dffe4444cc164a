"""Train / predict / evaluate workflow."""
