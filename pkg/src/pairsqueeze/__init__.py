"""Squeezed-state stabilization of an oscillator by correlated qubit pairs."""
