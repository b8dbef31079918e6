"""Entanglement-coordinated action selection: simulator, protocol, adversaries, analysis."""

__version__ = "0.1.0"
