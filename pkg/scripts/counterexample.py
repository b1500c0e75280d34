"""Eigenvalues of Q = L D M for the nine-node example with neither D = I nor commuting Laplacians."""
from mgconsensus.reference_data import COUNTEREXAMPLE_EIGENVALUES
from mgconsensus.spectral import counterexample_report

report = counterexample_report()
print(report.to_text())
print()
print("published        recomputed")
for pub, got in zip(sorted(COUNTEREXAMPLE_EIGENVALUES, key=lambda z: (-z.real, -z.imag)), report.eigenvalues):
    got = complex(got)
    print(f"{pub.real:+.4f}{pub.imag:+.4f}i  {got.real:+.6f}{got.imag:+.6f}i")
