"""Nontriviality certificates: when does the existence theorem promise a nonzero solution?

A nontrivial solution is guaranteed when the hypotheses hold and either some
a_j exceeds the first Dirichlet eigenvalue of its subinterval or A has a
nonnegative eigenvalue (m0 < m).
"""

import numpy as np

from impulse_morse import nontriviality_certificate, benchmark_problem

cases = {
    "benchmark (a = 50 pi^2, b = 3)": benchmark_problem([0.5], [50 * np.pi**2] * 2, [3.0]),
    "small a, b = 5": benchmark_problem([0.5], [np.pi**2] * 2, [5.0]),
    "small a, b = 3": benchmark_problem([0.5], [np.pi**2] * 2, [3.0]),
    "three nodes, b = 8": benchmark_problem([0.25, 0.5, 0.75], [np.pi**2] * 4, [8.0] * 3),
}
for name, prob in cases.items():
    cert = nontriviality_certificate(prob.mesh, prob)
    print(f"{name}:")
    print(f"   hypotheses {'hold' if cert.hypotheses_hold else 'fail'};"
          f" some a_j above lambda_1: {cert.condition_4_1}, A has a nonnegative direction: {cert.condition_4_2},"
          f" b below the three-point threshold: {cert.condition_4_3}")
    print(f"   m0 = {cert.m0}, k_saddle = {cert.k_saddle}: {cert.conclusion}")
    if cert.equally_spaced:
        eq = cert.equally_spaced
        print(f"   equally spaced: lambda_1 = {eq['lambda_1'] / np.pi**2:.0f} pi^2, b threshold {eq['b_threshold']:g}")
