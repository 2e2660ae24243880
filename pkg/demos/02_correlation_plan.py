"""
From a correlation table to a mixed-strength plan
=================================================

Load a finished correlation table, look up each parameter's partner and
group the strongly correlated parameters for higher-strength coverage.
"""
from cacit import bundled
from cacit.correlate import CorrelationMatrix, build_plan, partner

matrix = CorrelationMatrix.from_csv(bundled("replicated_workers_correlation.csv").read_text())
print(matrix.to_csv())

# the partner of p is the parameter it correlates with most
for i, name in enumerate(matrix.names):
    pt = partner(matrix, i)
    print(f"partner({name}) = {matrix.names[pt.index]} ({pt.value:.3f})")

# pairs above theta_high are merged into groups; rows below theta_low everywhere are don't-care
plan = build_plan(matrix, theta_high=0.9, theta_low=0.1, t_base=2, t_high=3)
print(plan.to_json())

# a lower threshold pulls more parameters into the group
print(build_plan(matrix, theta_high=0.7).to_dict()["groups"])
