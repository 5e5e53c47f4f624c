# %% [markdown]
# Symbols are finite sums  coef * z^alpha * zbar^beta * exp(-c |z|^2).
# This walk-through builds a few, differentiates them and forms the
# star-product cochains.

# %%
import numpy as np

from matrixbt.fock import DomainSpec
from matrixbt.symbols import (Symbol, cochain_C, cochain_series, d_z, flat, laplacian_prime,
                              pi_h, pi_h_series, poisson, upsilon_series)

z, zb = Symbol.z(), Symbol.zbar()
g = Symbol.gaussian(1)

print("z * zbar            =", z * zb)
print("(z+1)(z-1)          =", (z + 1) * (z - 1))
print("d/dz exp(-|z|^2)    =", d_z(g))
print("{z, zbar}           =", poisson(z, zb))

# %% evaluation is vectorized over a trailing variable axis
pts = np.array([[0.5 + 0.5j], [1.0], [-2j]])
print((z**2 * g)(pts))

# %% cochains: sign -1 is the convention that matches the Gaussian measure
for sign in (-1, 1):
    print(f"sign {sign:+d}: C_1(z, zbar) = {cochain_C(1, z, zb, sign)},  C_2(z^2, zbar^2) = {cochain_C(2, z**2, zb**2, sign)}")

# %% averaging out the internal variables of a two-variable symbol
d1, d2 = Symbol.z(1, 2), Symbol.abs2(2, 2)
phi = Symbol.abs2(1, 2) * d2 * Symbol.gaussian(1, 2)
print("flat(z1 + z1|z2|^2) =", flat(d1 + d1 * d2))
print("Lap'(|z2|^4)        =", laplacian_prime(d2 * d2))
print("pi_h at h=0.25      =", pi_h(phi, DomainSpec("plane", 0.25)))

# %% the same averaging with h kept symbolic, and the upsilon identity
a, b = d1 * d2, Symbol.zbar(1, 2)
print("pi_h series of z1|z2|^2:", pi_h_series(a))
lhs = cochain_series(2, pi_h_series(a), pi_h_series(b))
rhs = upsilon_series(2, a, b)
for p in range(3):
    print(f"h^{p}:", lhs[p], "|", rhs[p])

# %% symbols serialize to JSON (the CLI reads this form)
print(Symbol.from_json((z**2 + 0.5j * zb).to_json()))
