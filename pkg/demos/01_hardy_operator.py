# coding: utf-8

# # The averaging operator in log coordinates
#
# The classical averaging operator (Hf)(x) = (1/x) int_0^x f(y) dy is the
# kernel K(u) = 1[u >= 1] u^{-2} paired with the scaling a(u) = 1/u.
# Here we build it, look at its kernel pair, and read off norm and spectrum.

# %%

import numpy as np

from hausdorff import KernelSpec, OperatorHandle, admissibility, operator_norm, spectrum_curve

h = OperatorHandle.from_kernel(KernelSpec.hardy())
print(h.grid)

# %% [markdown]
# Only K_plus is nonzero: it equals e^{t/2} for t <= 0.  The masses are the
# quadrature weights the rest of the library works with, so their sum is the
# L1 norm of K_plus, which should be 2.

# %%

t = h.grid.nodes
print("K_plus at t = -1:", h.pair.kplus[np.searchsorted(t, -1.0)], "expected", np.exp(-0.5))
print("sum of masses:", h.pair.mass_plus.sum())
print("K_minus is zero:", not np.any(h.pair.kminus))

# %% [markdown]
# The symbol on the s-grid has phi_plus(s) = 1 / (1/2 - is).

# %%

sym = h.symbol
s = sym.s
print("max error vs closed form:", np.abs(sym.phi_plus - 1 / (0.5 - 1j * s)).max())

# %% [markdown]
# The norm is the sup of the two eigenvalue curves; the admissibility integral
# bounds it from above and here the bound is sharp.

# %%

print("symbol norm:", operator_norm(sym))
print("admissibility integral:", admissibility(h.kernel, h.aux).integral_value)

# %% [markdown]
# Both eigenvalue curves coincide and trace the circle |z - 1| = 1.

# %%

curve = spectrum_curve(sym)
pts = curve.branch_phi
print("max | |z-1| - 1 |:", np.abs(np.abs(pts - 1) - 1).max())
print("bounding radius:", curve.bounding_radius)
