# %% [markdown]
# Exact Toeplitz compressions on the Gaussian plane and on the disc.

# %%
import numpy as np

from matrixbt.fock import DomainSpec, FockBasis, effective_block, moment, op_norm, toeplitz_matrix
from matrixbt.semiclassical import sup_norm_grid
from matrixbt.symbols import Symbol

np.set_printoptions(precision=4, suppress=True, linewidth=120)
z, zb, r2 = Symbol.z(), Symbol.zbar(), Symbol.abs2()
h = 0.1
B = FockBasis(DomainSpec("plane", h), 6)

# %% shift and number operators
Tz, Tzb, Tr = (toeplitz_matrix(s, B).entries.real for s in (z, zb, r2))
print("T_z =\n", Tz)
print("T_|z|^2 diagonal:", np.diag(Tr))

# %% composition: T_z T_zbar = T_|z|^2 - h, T_zbar T_z = T_|z|^2 (away from the truncation edge)
print(effective_block(Tz @ Tzb - Tr, 2).diagonal())
print(effective_block(Tzb @ Tz - Tr, 2).diagonal())

# %% disc moments: int |z|^4 dmu_h = 2h^2/(1+h)
disc = DomainSpec("disc", 0.3)
print(moment(disc, 2, 2), 2 * 0.3**2 / 1.3)

# %% norm never exceeds the sup of the symbol, and approaches it as h -> 0
phi = r2 * Symbol.gaussian(1)
print("sup |phi| =", sup_norm_grid(phi, DomainSpec("plane", 0.1)))
for h in (0.2, 0.1, 0.05, 0.02):
    dom = DomainSpec("plane", h)
    print(h, op_norm(toeplitz_matrix(phi, FockBasis(dom, int(8 / h)))))
