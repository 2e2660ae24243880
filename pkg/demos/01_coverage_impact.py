"""
Measuring parameter impact on code coverage
===========================================

A two-flag program with five lines of code. Each flag unlocks some lines
and the two flags share a block, so turning both on covers more than
either alone.
"""
from cacit import bundled, load_fixture
from cacit.impact import FixtureAdapter, all_impacts, execute, plan_experiments, sensitivity_report

fx = load_fixture(bundled("overlap.yaml"))

# one-factor-at-a-time sweeps plus pairwise sweeps, deduplicated
plan = plan_experiments(fx.model, profile_count=2)
print("planned runs:", plan.planned_single, "single,", plan.planned_pair, "pair,",
      len(plan.assignments), "unique")

# the fixture adapter evaluates the guarded blocks in-process
matrix = execute(plan, FixtureAdapter(fx.sut))
for case in plan.assignments:
    print(dict(zip(fx.model.names, case)), "covers", sorted(matrix.entries[case].covered),
          f"({float(matrix.fraction(case)):.2f})")

# impact is the spread of coverage fractions while only that parameter moves
singles, pairs = all_impacts(matrix)
for imp in singles:
    print("I", fx.model.names[imp.subject[0]], "=", imp.value)
for (p, q), imp in pairs.items():
    print("I", fx.model.names[p], fx.model.names[q], "=", imp.value)

report = sensitivity_report(matrix)
print("never covered:", sorted(report.never_covered))
