"""HydroTwin: pressure prediction for hydraulic loader cranes."""

__version__ = "1.0.0"
