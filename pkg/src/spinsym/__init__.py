"""spinsym: verification toolkit for rotationally invariant spin-1/2
Hamiltonians with 2x2 matrix potentials.

Subpackages/modules:
  symkernel -- exact operator algebra (scalars, sigma matrices, diff ops)
  models    -- catalog of Hamiltonians and integrals of motion
  detsys    -- determining equations and Killing-tensor ansaetze
  angular   -- spinor spherical harmonics and sector blocks
  radial1d  -- radial reductions, SUSY factorization, closed-form spectra
  numerics  -- finite-difference eigensolvers, Kummer function, quadrature
  cli       -- command-line verification entry point
"""

__version__ = "0.1.0"
