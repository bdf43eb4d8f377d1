"""Oscillation criteria for (p Phi')' + q Phi' + R Phi = 0 systems."""
