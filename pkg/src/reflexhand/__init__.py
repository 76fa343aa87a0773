"""Sensorimotor control stack for a 1-DoF myoelectric hand, with a
reduced-order grasp simulator, trial harness, and live session service."""

__version__ = "0.1.0"
