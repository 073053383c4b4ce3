"""Physical constants and unit conversions.

Internally everything is in natural units with hbar = c = eps0 = 1:
energies in eV, lengths in 1/eV, areas in 1/eV^2.  Conversions to and
from nanometres happen only at the I/O boundary.
"""
import math

HBARC_EV_NM = 197.3269804
ELECTRON_MASS_EV = 510998.95
FINE_STRUCTURE = 7.2973525693e-3
#: Elementary charge in Heaviside-Lorentz natural units, e^2 = 4 pi alpha.
ELEMENTARY_CHARGE = math.sqrt(4.0 * math.pi * FINE_STRUCTURE)


def nm_to_natural(length_nm):
    return length_nm / HBARC_EV_NM


def natural_to_nm(length):
    return length * HBARC_EV_NM


def nm2_to_natural(area_nm2):
    return area_nm2 / HBARC_EV_NM**2


def coupling_constant(charge, mass, area):
    """lambda = q^2 / (m eps0 S) in eV^3."""
    return charge * charge / (mass * area)
