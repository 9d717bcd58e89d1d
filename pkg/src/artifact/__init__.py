"""Numerical toolkit for the focusing Ablowitz-Ladik lattice: direct
integration, direct scattering, soliton construction, a three-circle
Riemann-Hilbert solver, and long-time asymptotic evaluation."""

__version__ = "0.1.0"
