"""Local adiabatic search under eigenbasis dephasing."""

__version__ = "0.1.0"
