"""
Generating and verifying covering arrays
========================================

Uniform pairwise and 3-way suites for a bundled model, then a mixed
suite that covers one group at strength 3 and the rest pairwise.
"""
from cacit import bundled, load_model
from cacit.cagen import compile_requirements, generate, suite_stats, verify
from cacit.model import CoverageRequirement, exhaustive_size, uniform

model = load_model(bundled("mortgage.yaml"))
print("parameters:", dict(zip(model.names, model.sizes)))
print("exhaustive:", exhaustive_size(model))

suites = {}
for t in (2, 3):
    universe = compile_requirements(model, uniform(model, t))
    suites[t] = generate(model, universe, label=f"{t}-way")
    print(f"{t}-way: {len(suites[t])} rows for {len(universe)} tuples,",
          "verified" if verify(suites[t], universe).ok else "INCOMPLETE")

# strength 3 only among the first three parameters
mixed_reqs = uniform(model, 2) + [CoverageRequirement([0, 1, 2], 3)]
universe = compile_requirements(model, mixed_reqs)
mixed = generate(model, universe, label="mixed")
print("mixed:", len(mixed), "rows,", "verified" if verify(mixed, universe).ok else "INCOMPLETE")
print(suite_stats(suites[2], mixed).to_dict())

# the pairwise suite leaves some of the group's triples uncovered
gap = verify(suites[2], universe)
print(len(gap.uncovered), "group triples missing from the pairwise suite, e.g.",
      gap.uncovered[0].describe(model))

print(mixed.to_csv())
