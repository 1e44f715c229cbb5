"""Verified numerics for elliptic Selberg integrals and torus conformal blocks.

The package evaluates theta-type special functions, proves theta-constant
identities in exact arithmetic, computes Selberg integrals in closed form and
by quadrature, constructs Macdonald-polynomial modular matrices, evaluates
regularised block integrals, and mechanically verifies a family of ten
block/theta identities together with the heat-equation structure behind them.
"""

from . import errors  # noqa: F401

__version__ = "0.1.0"
