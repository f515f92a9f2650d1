# coding: utf-8

# # Applying an operator to a function
#
# Two independent routes: direct integration against the kernel, and a
# Mellin-side multiplier.  Both act on samples of f on a log-spaced grid.

# %%

import numpy as np

from hausdorff import (
    GridFunction,
    KernelSpec,
    OperatorHandle,
    apply_direct,
    apply_via_symbol,
    conjugation_multiplier,
    estimate_norm,
)

hardy = OperatorHandle.from_kernel(KernelSpec.hardy())
f = GridFunction.from_callable(lambda x: ((x >= 0) & (x <= 1)).astype(float), hardy.grid, (1.0,))
print("||f|| =", f.l2_norm())

# %% [markdown]
# Averaging the indicator of [0, 1] gives min(1, 1/x) on the positive axis.

# %%

g = apply_direct(hardy, f)
x = g.x
exact = GridFunction(g.grid, np.minimum(1.0, 1.0 / x), np.zeros_like(x))
print("||Hf|| =", g.l2_norm(), " sqrt(2) =", np.sqrt(2))
print("relative L2 error:", (g - exact).l2_norm() / exact.l2_norm())

# %% [markdown]
# The multiplier route.  For a = 1/u the multiplier is the symbol itself.

# %%

m = conjugation_multiplier(hardy)
g2 = apply_via_symbol(hardy, f, m)
print("route deviation:", (g2 - g).l2_norm() / g.l2_norm())

# %% [markdown]
# Power iteration on H*H sees the same norm as the symbol.

# %%

print("power iteration:", estimate_norm(hardy, 50))
