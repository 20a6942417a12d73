"""Single-agent surface coating on the FCC lattice (3D hybrid programmable matter)."""

__version__ = "0.1.0"
