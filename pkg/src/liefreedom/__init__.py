"""Fox-derivative calculus on finitely generated free Lie algebras.

The package computes, exactly and per degree up to a truncation bound, the
objects appearing in the freedom theorems for relatively free Lie algebras:
Lyndon bases, Fox derivatives in the enveloping algebra, polynilpotent
series, relator Jacobian matrices and their valuation-guided
triangularization, and the degreewise intersection oracle that certifies the
theorems on concrete presentations.
"""

from .fields import GF, QQ, field_from_spec

__all__ = ["GF", "QQ", "field_from_spec"]

__version__ = "0.1.0"
