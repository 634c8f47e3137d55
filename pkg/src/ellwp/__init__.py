"""Decision procedures and models for lattice-ordered groups.

* ``term``: the term language, normal forms, the one-generator oracle
* ``freedec``: the word problem in free l-groups (diagram search)
* ``perm``: exact piecewise-linear automorphisms of the rationals
* ``wreath``: cardinal sums and wreath products over Z
* ``present``: presentations, certificates and relator schemas
"""

from .freedec import ResourceExhausted, Verdict, VerdictKind, decide
from .term import LTerm, normalize, parse, to_text

__all__ = ["LTerm", "ResourceExhausted", "Verdict", "VerdictKind", "decide", "normalize", "parse", "to_text"]
__version__ = "0.1.0"
