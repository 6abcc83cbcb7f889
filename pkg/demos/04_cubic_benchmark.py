"""A problem with a closed-form answer: f = 0 and a cubic impulse at x = 1/2.

u is piecewise linear, so u = s x on the left and the jump condition reads
-2 s = -(s/2)^3, giving s in {0, +-4}, i.e. u = +-8 w_1 with u(1/2) = +-2 and
energy 4.  Galerkin search, shooting and residual checks must all agree.
"""

from impulse_morse import build_basis, make_problem, saddle_search
from impulse_morse.shooting import bisect_solutions

prob = make_problem([0.5], [0.0, 0.0], [0.0], h=["cubic"])
print("shooting roots:", [round(t.slope, 12) for t in bisect_solutions(prob, (-10, 10), grid=100)])

for p in saddle_search(prob, build_basis(prob.mesh, 8)):
    print(f"u(1/2) = {p.node_values[0]:+.12f}  energy {p.energy:.12f}  inertia {p.hessian_inertia}"
          f"  residual {p.verification.max_residual:.1e}")
