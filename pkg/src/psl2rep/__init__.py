"""Surface-group representations into PSL(2,R): Euler classes,
displacement functionals, cyclic-order invariants, and R-tree
degenerations."""

from psl2rep._core import KERNEL_IMPL

__all__ = ["KERNEL_IMPL"]
__version__ = "0.1.0"
