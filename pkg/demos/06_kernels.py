# %% [markdown]
# Matrix reproducing kernels and coherent states.

# %%
import numpy as np
from scipy.linalg import expm

from matrixbt.domain import NormalTuple, haar_sample, mc_integrate
from matrixbt.fock import DomainSpec
from matrixbt.kernels import (KernelSeries, coherent_state, kernel_eval, product_gram_mc, product_kernel_eval,
                              product_toeplitz_mismatch, reproduce_check)

rng = np.random.default_rng(0)
plane = DomainSpec("plane", 0.5)
ks = KernelSeries(plane, 60)


def point(N, radius=0.6):
    d = radius * np.exp(2j * np.pi * rng.uniform(size=(N, 1)))
    return NormalTuple(haar_sample(N, rng), d)


# %% scalar case is the exponential
x, y = 0.3 + 0.4j, -0.2 + 0.1j
print(kernel_eval(NormalTuple.diagonal([x]), NormalTuple.diagonal([y]), ks)[0, 0], np.exp(x * np.conj(y) / plane.h))

# %% for non-commuting points it is not exp(X Y^*/h)
X, Y = point(2), point(2)
print(np.linalg.norm(kernel_eval(X, Y, ks) - expm(X.matrix() @ Y.matrix().conj().T / plane.h)))

# %% reproducing property by Monte Carlo
Z = point(2, 0.5)
for k in range(3):
    print(reproduce_check(k, 1, Z, ks, samples=50_000, seed=k).to_json())

# %% a coherent state at Z has unit norm
kz = coherent_state(Z, np.array([1.0, 0.0]), ks)
est = mc_integrate(lambda X: np.sum(np.abs(kz(X)) ** 2, axis=-1), plane, 2, samples=50_000, seed=9)
print("norm^2:", est.mean.real, "+/-", est.stderr)

# %% non-commuting pairs: ordering matters, the Gram check still holds
A, B = [point(2).matrix() for _ in range(2)], [point(2).matrix() for _ in range(2)]
print(np.linalg.norm(product_kernel_eval(A, B, ks) - product_kernel_eval(A, B, ks, order=[1, 0])))
est = product_gram_mc(plane, 2, 2, 1, samples=50_000, seed=1)
print("Gram max z:", est.z_scores(np.eye(est.mean.shape[0])).max())

# %% but left multiplication by the second factor is not T_{z_2} (x) I
print(product_toeplitz_mismatch(plane, samples=50_000, seed=2))
