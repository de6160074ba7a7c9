"""Group-labeled unique games, bijective pebble games, and SDP relaxations."""

__version__ = "0.1.0"
