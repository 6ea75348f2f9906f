"""LP-relaxed FEC decoding and code-anchored multi-user MIMO receivers."""

__version__ = "0.1.0"
