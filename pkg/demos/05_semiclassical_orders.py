# %% [markdown]
# How fast does T_phi T_psi approach sum_r h^r T_{C_r(phi, psi)}?

# %%
from matrixbt.fock import DomainSpec
from matrixbt.semiclassical import (decay_table, expansion_check_localized, expansion_check_spectral,
                                    expansion_check_u_invariant, sign_probe, sup_norm_limit)
from matrixbt.symbols import Symbol

z, zb, r2 = Symbol.z(), Symbol.zbar(), Symbol.abs2()
plane = DomainSpec("plane", 0.1)

# %% which sign makes T_z T_zbar = T_|z|^2 + h C_1 exact?
print(sign_probe())

# %% fixed truncation K = 24: the block covers |z|^2 <~ 16h, shrinking with h
for pair in ((z**2, zb**2), (r2, r2), (z + zb, z * zb)):
    for R in (0, 1):
        rep = expansion_check_spectral(*pair, R, plane)
        print(rep.label, "R =", R, "slope", rep.fitted_slope)

# %% a block that tracks the fixed region |z|^2 <= 1 instead
for pair in ((z**2, zb**2), (r2, r2), (z + zb, z * zb)):
    for R in (0, 1):
        rep = expansion_check_localized(*pair, R, plane)
        print(rep.label, "R =", R, "slope", rep.fitted_slope, "K per h", rep.config["K"])

# %% U-invariant pair: averaged cochains (A) against the upsilon cochains (B)
rep = expansion_check_u_invariant(Symbol.z(1, 2) * Symbol.abs2(2, 2), Symbol.zbar(1, 2), 1, plane, 2)
for name, tr in rep.tracks.items():
    print(name, tr.residuals, tr.slope)

# %% norm limits
for row in sup_norm_limit(r2 * Symbol.gaussian(1), plane, (0.1, 0.05, 0.02)):
    print(row)
print(decay_table())
