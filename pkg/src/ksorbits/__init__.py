"""Periodic orbits of the odd Kuramoto-Sivashinsky flow, with rigorous
a-posteriori validation in weighted l1 spaces of Fourier coefficients."""

__version__ = "0.1.0"
