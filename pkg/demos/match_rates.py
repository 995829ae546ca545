"""Monte Carlo homology match rates against the closed-form bound.

Runs a small version of the validation experiment: for each grid
resolution M, the fraction of random fields whose grid homology matches
a fine-grid reference, with a Wilson 95% interval, next to the
theoretical lower bound 1 - c(N)/M^2.  With the full trial counts used
in the test suite the intervals sit on or above the bound wherever it
is nonvacuous; certified-but-wrong outcomes never occur.
"""

from nodalcheck.experiments import homology_experiment

TRIALS = 400

print(f"1D, N = 5, {TRIALS} trials per row")
s = homology_experiment(1, 5, [12, 18, 28, 40], trials=TRIALS, seed=7)
print(f"{'M':>4}  {'match':>6}  {'95% CI':>16}  {'certified':>9}  "
      f"{'bound':>7}")
for row in s.rows:
    bound = f"{row['bound']:.4f}" if row["bound"] > 0 else "vacuous"
    print(f"{row['M']:>4}  {row['rate_match']:>6.3f}  "
          f"[{row['ci_lo']:.3f}, {row['ci_hi']:.3f}]  "
          f"{row['rate_certified']:>9.3f}  {bound:>7}")
print(f"certified-but-mismatched trials: "
      f"{len(s.extra['soundness_exceptions'])}")

print(f"\n2D, N = 3, {TRIALS // 4} trials per row (bound vacuous until "
      f"M is in the hundreds)")
s2 = homology_experiment(2, 3, [8, 16, 32], trials=TRIALS // 4, seed=7)
for row in s2.rows:
    print(f"{row['M']:>4}  {row['rate_match']:>6.3f}  "
          f"[{row['ci_lo']:.3f}, {row['ci_hi']:.3f}]  "
          f"{row['rate_certified']:>9.3f}  {'vacuous':>7}")
print(f"certified-but-mismatched trials: "
      f"{len(s2.extra['soundness_exceptions'])}")
