# coding: utf-8

# # Composing operators
#
# Operators sharing a scaling function compose by convolving their kernel
# pairs.  On the symbol side that is pointwise multiplication.

# %%

import numpy as np

from hausdorff import (
    KernelSpec,
    OperatorHandle,
    check_commutativity,
    compose,
    lincomb,
    multiply_symbols,
    operator_norm,
)

hardy = OperatorHandle.from_kernel(KernelSpec.hardy())
lg = OperatorHandle.from_kernel(KernelSpec.log_gaussian(1.0))
tp = OperatorHandle.from_kernel(KernelSpec.truncated_power(-2.5, 2.0))

# %% [markdown]
# H squared has K_plus(t) = -t e^{t/2} on t <= 0 and norm 4.

# %%

h2 = compose(hardy, hardy)
t = h2.grid.nodes
k = np.searchsorted(t, -3.0)
print("Q_plus(-3):", h2.pair.kplus[k], "expected", 3 * np.exp(-1.5))
print("norm of H^2:", operator_norm(h2.symbol))

# %% [markdown]
# Symbol of a composition against the product of symbols.

# %%

for a, b in [(hardy, lg), (lg, tp), (tp, hardy)]:
    q = compose(a, b).symbol
    p = multiply_symbols(a.symbol, b.symbol)
    print(f"{a.kernel.preset_tag:>16} o {b.kernel.preset_tag:<16}",
          np.abs(q.phi_plus - p.phi_plus).max())

# %% [markdown]
# The algebra is commutative, and linear combinations stay inside it.

# %%

rep = check_commutativity(hardy, lg)
print("commutator deviations:", rep.max_symbol_deviation, rep.max_kernel_deviation)

zero = lincomb(1.0, hardy, -1.0, hardy)
print("H - H has norm", operator_norm(zero.symbol))
