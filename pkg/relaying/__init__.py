"""Rate regions and phase schedules for half-duplex bi-directional relaying."""

__version__ = "0.3.0"
