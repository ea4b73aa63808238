"""Unit conventions and physical constants.

Every quantity in this package uses the same unit system:

* length      : micrometre (um)
* time        : microsecond (us)
* wavenumber  : rad/um
* phase       : rad
* magnetic field : Gauss (G)
* potential   : expressed as angular frequency, rad/us (i.e. V/hbar)

These choices keep all experimentally relevant magnitudes of order one
(kappa ~ 0.05-0.5 rad/um, sigma ~ 1-100 um, pulse times ~ 1-1000 us).
"""

# hbar / m for 87Rb in um^2/us.
# hbar = 1.054571817e-34 J s, m(87Rb) = 86.909180527 u * 1.66053906660e-27 kg
#      = 1.4431607e-25 kg  ->  hbar/m = 7.30742e-10 m^2/s = 7.30742e-4 um^2/us
HBAR_OVER_M_RB87 = 7.30742e-4

# Bohr magneton over hbar, rad/(us G):
# mu_B/hbar = 8.794100e10 rad/(s T) = 8.794100 rad/(us G)
MU_B_OVER_HBAR = 8.794100

# Lande g-factor of the 87Rb F=2 ground-state manifold.
G_F = 0.5

# Standard gravity, um/us^2.
G_GRAVITY = 9.80665e-6
