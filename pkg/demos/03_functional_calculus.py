# coding: utf-8

# # Holomorphic functions of an operator
#
# For F holomorphic near the spectrum with F(0) = 0, F(H) is again in the
# algebra.  Its symbol follows from a contour integral of the 2x2 resolvent.

# %%

import numpy as np

from hausdorff import (
    Contour,
    HoloFunction,
    KernelSpec,
    OperatorHandle,
    apply_function,
    auto_contour,
    compose,
    operator_norm,
    spectrum_curve,
)

hardy = OperatorHandle.from_kernel(KernelSpec.hardy())
gamma = auto_contour(spectrum_curve(hardy.symbol))
print(gamma.kind, gamma.params)

# %% [markdown]
# z^2 through the contour must reproduce H composed with itself.

# %%

sq = apply_function(HoloFunction.square(), gamma, hardy)
ref = compose(hardy, hardy)
print("mass deviation:", np.abs(sq.pair.mass_plus - ref.pair.mass_plus).max())
print("norm:", operator_norm(sq.symbol))

# %% [markdown]
# Any contour enclosing the spectrum gives the same answer.

# %%

rect = apply_function(HoloFunction.square(), Contour.rectangle(-0.5, 2.5, -1.5, 1.5), hardy)
print("circle vs rectangle:", np.abs(rect.symbol.phi_plus - sq.symbol.phi_plus).max())

# %% [markdown]
# A resolvent-type function z/(mu - z) with mu = -2 outside the spectrum.
# Its symbol is F applied to the eigenvalue curves.

# %%

mu = -2.0
R = apply_function(HoloFunction.resolvent(mu), Contour.circle(1.0, 1.4), hardy)
phi = hardy.symbol.phi
print("symbol vs F(phi):", np.abs(R.symbol.phi - phi / (mu - phi)).max())
