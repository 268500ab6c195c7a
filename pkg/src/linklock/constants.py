"""Numeric tolerances shared across the package.

All figures are unit scale (half-height 1), so absolute tolerances are used
throughout.
"""

# Edge-length residual acceptance.
TOL_LEN = 1e-9

# Geometric predicates: contacts closer than this are "touching", never
# "crossing".
TOL_GEOM = 1e-9

# Angular comparisons ("less than 90 degrees" is tested with this slack).
TOL_ANG = 1e-9

# Relative singular-value cutoff for the rigidity rank test.
TOL_RANK = 1e-7

# A motion sample counts as flat below this.
FLAT_TOL = 1e-4
