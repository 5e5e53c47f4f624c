# %% [markdown]
# Sampling commuting normal matrices (Haar unitary x independent eigenvalues)
# and integrating matrix-valued functions over them.

# %%
import math

import numpy as np

from matrixbt.domain import (haar_conj_average, haar_sample, mc_integrate, mu_sample, power_moments_exact,
                             power_moments_mc, spectral_apply, u_invariant_apply)
from matrixbt.fock import DomainSpec
from matrixbt.symbols import Symbol

rng = np.random.default_rng(0)
dom = DomainSpec("plane", 0.5)

# %% a sample point
Z = mu_sample(dom, 3, 1, rng)
Z.check(dom)
M = Z.matrix()
print("normality defect:", np.linalg.norm(M @ M.conj().T - M.conj().T @ M))
print("spectral z^2 vs M @ M:", np.linalg.norm(spectral_apply(Symbol.z() ** 2, Z) - M @ M))

# %% U-invariant functions: phi(d_k; the other eigenvalues)
phi = Symbol.z(1, 3) * (Symbol.abs2(2, 3) + Symbol.abs2(3, 3))
V = haar_sample(3, rng)
lhs = u_invariant_apply(phi, Z.transform(V))
rhs = V.conj().T @ u_invariant_apply(phi, Z) @ V
print("equivariance defect:", np.abs(lhs - rhs).max())

# %% Haar averaging:  E[U^* X U] = Tr X / N
X = np.diag([1.0, 0.0])
print(haar_conj_average(X))

# %% moments of matrix powers, int Z^{*j} Z^k = delta_jk k! h^k I
est = power_moments_mc(dom, 2, 3, samples=50_000, seed=1)
z = est.z_scores(power_moments_exact(dom, 2, 3)).max(axis=(-2, -1))
print("z-scores per (j, k):\n", np.round(z, 2))
print("k! h^k:", [math.factorial(k) * dom.h**k for k in range(4)])

# %% seeds are per block, so worker count does not matter
f = lambda Z: Z.matrix() @ Z.matrix().conj().swapaxes(-1, -2)  # noqa: E731
a = mc_integrate(f, dom, 2, samples=20_000, seed=3, workers=1)
b = mc_integrate(f, dom, 2, samples=20_000, seed=3, workers=4)
print("identical:", a.dumps() == b.dumps())
