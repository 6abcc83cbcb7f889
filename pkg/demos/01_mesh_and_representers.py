"""The impulse mesh, the representers w_j and the Gram matrix of M.

Every u in H^1_0 splits as u = v + w with v vanishing at the nodes and w in
M = span{w_j}.  Point evaluation at x_j is the inner product with w_j, so
G[j, k] = w_j(x_k) is both the Gram matrix of M and the node-value map.
"""

import numpy as np

from impulse_morse import build_basis, build_mesh, eval_u, representer_eval
from impulse_morse.mesh import m_subspace_norms

mesh = build_mesh([1 / 3, 2 / 3])
print(mesh, "lengths", mesh.subinterval_lengths)
print("G =\n", mesh.gram)
print("eigenvalues of G:", np.linalg.eigvalsh(mesh.gram), "(1/9 and 1/3)")

# w_1 peaks at its own node and is affine elsewhere
xs = np.linspace(0, 1, 7)
print("w_1 on a coarse grid:", np.round(representer_eval(mesh, 1, xs), 4))

# for elements of M the largest value sits at a node
c = np.array([1.0, -2.5])
h_norm, node_max = m_subspace_norms(mesh, c)
print(f"w = w_1 - 2.5 w_2: |w|_H = {h_norm:.6f}, max_j |w(x_j)| = {node_max:.6f}")

# reproducing property, checked by quadrature of int u' w_1'
basis = build_basis(mesh, 8)
rng = np.random.default_rng(0)
u = basis.coeffs(rng.standard_normal(basis.dim))
lhs = 0.0
for s in range(mesh.m + 1):
    x, w = basis.quad_x[s], basis.quad_w[s]
    slope_w1 = np.where(x < mesh.interior_points[0], 1 - mesh.interior_points[0], -mesh.interior_points[0])
    lhs += w @ (eval_u(basis, u, x, derivative=True) * slope_w1)
print(f"<u, w_1> = {lhs:.15f}   u(x_1) = {eval_u(basis, u, 1 / 3):.15f}")
