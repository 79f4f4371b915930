"""Extremal domains for the mixed first eigenvalue near a wall."""
