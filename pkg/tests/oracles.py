"""Frozen reference values, each produced by a route independent of the package.

* ``DISPLACEMENT``: <m|D(g)|n> for g = 1.3 + 0.4i from the associated-Laguerre
  closed form evaluated with mpmath at 40 digits.
* ``STEP_MINIMA``: first minimum of rho for TanhStep(1, w_f, 2, 1e4), from the
  linear route rho^2 = u1^2 + u2^2 with u'' + Omega^2 u = 0 (u1 = 1, u1' = 0,
  u2 = 0, u2' = 1), integrated with an implicit Radau scheme and minimised by
  Brent's method.
* ``NEGATIVITY_FOCK1``: 2 exp(-1/2) - 1, the radial integral of the negative
  part of W for |1>.
"""

import math

DISPLACEMENT_GAMMA = 1.3 + 0.4j
DISPLACEMENT = {
    (0, 0): 0.39653141907499284 + 0j,
    (7, 3): 0.12187096313084211 + 0.3079823338899325j,
    (2, 9): 0.0837061691345189 + 0.14663891467016751j,
    (40, 35): -0.012990570427476275 - 0.16556493247644802j,
}

STEP_MINIMA = {
    2.0: (2.7854148280410036, 0.5000000059601692),
    3.0: (2.5236237741730663, 0.3333333434662158),
    4.0: (2.3927290806877393, 0.25000001373375247),
}

NEGATIVITY_FOCK1 = 0.21306131942526685

# physicists' Hermite values by monomial expansion: H_3 = 8 z^3 - 12 z, H_4 = 16 z^4 - 48 z^2 + 12
HERMITE_3_AT_1_PLUS_I = -28 + 4j
HERMITE_4_AT_0 = 12.0

# squeezed vacuum at r = ln 2: |c_2 / c_0| = tanh(r) / sqrt(2)
SQZ_VAC_RATIO = 0.6 / math.sqrt(2)
