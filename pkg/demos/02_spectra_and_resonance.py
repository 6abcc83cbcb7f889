"""Dirichlet spectra per subinterval, the resonance set B and the Morse index at zero.

The linearization at zero only sees the impulse slopes b: its Hessian on M is
A = G - G diag(b) G, singular exactly when det(diag(b) G - I) = 0.  Along any
path in b that avoids B the Morse index m0 cannot change.
"""

import numpy as np

from impulse_morse import build_mesh, morse_report, resonance_det, resonance_path_scan, spectral_report
from impulse_morse.shooting import linear_transfer

mesh = build_mesh([0.5])
rep = spectral_report(mesh, [50 * np.pi**2] * 2)
for s in rep.subintervals:
    print(f"subinterval {s.index}: d = {s.d}, class {s.cls}, first eigenvalues / pi^2 =",
          np.round(np.array(s.eigenvalues[:4]) / np.pi**2, 6))
print("k_saddle =", rep.k_saddle)

for b in (0.0, 3.0, 4.0, 5.0):
    r = resonance_det(mesh, [b])
    mr = morse_report(mesh, [b])
    print(f"b = {b}: det = {r.det_value:+.4f}  in B: {r.in_B}  m0 = {mr.m0}  C_q = {mr.critical_groups}")

# two nodes: crossings at t = 3 and t = 9 along b = (t, t)
thirds = build_mesh([1 / 3, 2 / 3])
scan = resonance_path_scan(thirds, [0.0, 0.0], [10.0, 10.0], steps=100)
for c in scan.crossings:
    print(f"crossing at b = {c.b[0]:.12f}: m0 {c.m0_before} -> {c.m0_after}")

# the shooting transfer map vanishes at the same parameters
for t in (3.0, 9.0):
    print(f"u(1) of the linear transfer map at t = {t}: {linear_transfer(thirds, [t, t]):.2e}")
