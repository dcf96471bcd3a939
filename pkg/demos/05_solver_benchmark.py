"""Solver cost against problem size.

Seeded random masked instances at increasing scale, solved to 1e-6.  The
largest row matches the shape of a ~60k-sentence corpus (30.8k word-label
rows by 7.8k subword columns at about 1% finite density).
"""

from subalign import BenchRecord, bench_solver

SIZES = [
    (100, 50, 0.5),
    (1000, 500, 0.1),
    (5000, 2000, 0.05),
    (15000, 5000, 0.02),
    (30800, 7800, 0.01),
]

print(BenchRecord.csv_header())
for rows, cols, density in SIZES:
    record = bench_solver(rows, cols, density=density, gamma=0.1, seed=2024,
                          tolerance=1e-6)
    print(record.csv_row())

# Re-run with a smaller gamma to exercise the log-domain path; the same
# instances take more iterations as the kernel sharpens.
print()
print("gamma=0.015 (log-domain):")
print(BenchRecord.csv_header())
for rows, cols, density in SIZES[:3]:
    record = bench_solver(rows, cols, density=density, gamma=0.015, seed=2024,
                          tolerance=1e-6)
    print(record.csv_row())
