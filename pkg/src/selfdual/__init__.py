"""Spectral tools for the self-dual reduction of incompressible Navier-Stokes flow."""

__version__ = "0.1.0"
