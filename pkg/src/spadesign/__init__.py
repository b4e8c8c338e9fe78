"""Modeling, characterization and inverse design of strain-limited soft pneumatic actuators."""

__version__ = "0.1.0"
