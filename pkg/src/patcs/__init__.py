"""Photoacoustic tomography as undersampled generalised Fourier measurements.

Modules
-------
specfun     Bessel functions and zeros, Legendre functions, spherical harmonics
eigenbasis  Dirichlet eigenpairs (square, disk, ball), DST-I, synthesis, phantom
wavesim     finite-difference forward model on the square, measurements, noise
riesz       nonharmonic cosine families and coefficient recovery
freespace   free-space propagation, traces and moment formulas
cspat       two-level sampling patterns and TV reconstruction
"""

__version__ = "0.1.0"
