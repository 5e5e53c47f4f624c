# %% [markdown]
# Matrix Toeplitz operators on the space of matrix-valued holomorphic
# functions, estimated by Monte Carlo and compared with scalar Toeplitz
# matrices tensored with the identity.

# %%
from matrixbt.fock import DomainSpec, FockBasis, op_norm, toeplitz_matrix
from matrixbt.hilbert import compare_spectral, compare_u_invariant, det_gaussian_symbol, matrix_toeplitz_mc, verify_gram
from matrixbt.symbols import Symbol, pi_h

plane, disc = DomainSpec("plane", 0.5), DomainSpec("disc", 0.3)

# %% the basis e_k(Z) chi_j is orthonormal
for dom in (plane, disc):
    print(verify_gram(dom, 2, 3, samples=50_000, seed=1).dumps())

# %% spectral symbols: T_{phi^#} = T_phi (x) I
for phi in (Symbol.z(), Symbol.z() * Symbol.zbar()):
    rep = compare_spectral(phi, plane, 2, 3, samples=50_000, seed=2)
    print(phi, "max z", round(rep.max_z, 2), "pass", rep.passed)

# %% U-invariant symbols: T = T_{pi_h phi} (x) I
phi = Symbol.z(1, 2) * Symbol.abs2(2, 2)
print("pi_h phi =", pi_h(phi, plane, 2))
rep = compare_u_invariant(phi, plane, 2, 3, samples=50_000, seed=3)
print("max z", round(rep.max_z, 2), "pass", rep.passed)

# %% a smooth U-invariant symbol whose quantization shrinks with h
for h in (0.4, 0.2, 0.1):
    dom = DomainSpec("plane", h)
    est = matrix_toeplitz_mc(det_gaussian_symbol, dom, 2, 3, samples=50_000, seed=4)
    reduced = pi_h(Symbol.monomial((1, 1), (1, 1), c=1), dom, 2)
    block = op_norm(toeplitz_matrix(reduced, FockBasis(dom, 3)))
    full = op_norm(toeplitz_matrix(reduced, FockBasis(dom, int(8 / h))))
    print(f"h={h}: MC norm {op_norm(est.mean):.4f}, same block exact {block:.4f}, converged {full:.4f}")
