"""
Certifying a geometry with the property suites
==============================================

run_suites draws random near points and fields and reports the largest
deviation of each invariant.  The same runs are available from the shell
as ``weilgeom check``.
"""
from weilgeom import parse_config, run_suites

cfg = parse_config({"algebra": {"kind": "jet", "vars": 1, "order": 2},
                    "geometry": {"preset": "poincare"},
                    "suites": ["connection", "torsion", "metric"],
                    "samples": 40})
report = run_suites(cfg)
print(report.to_text())

# a torsionful control: Christoffel symbol G^1_12 = 1 on the flat plane
control = {"preset": "euclid",
           "christoffel": [[["0", "1"], ["0", "0"]], [["0", "0"], ["0", "0"]]]}
cfg = parse_config({"algebra": {"kind": "dual"}, "geometry": control, "suites": ["torsion"],
                    "samples": 40, "expect_fail": ["torsion.base_free", "torsion.free_preserved"]})
report = run_suites(cfg)
print()
print(report.to_text())
print("exit code:", report.exit_code)
