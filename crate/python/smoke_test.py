"""Quick end-to-end check of the nadic extension module.

Build first:  pip install --no-build-isolation -e crates/py
"""
from fractions import Fraction

import nadic


def main():
    w = nadic.find_witness([3], "7/500", 50)
    assert w["x"] == 19 and w["p"]["3"] == 12, w
    assert Fraction(w["errors"]["3"]) == Fraction(7153, 531441)
    assert (12, 19) in nadic.convergent_candidates(3)

    j = nadic.NAdicInterval(3, 1, 2)
    kids = j.children()
    assert len(kids) == 3 and kids[0].lo == j.lo and kids[-1].hi == j.hi

    p = nadic.ReweightParams(Fraction(2, 3), 2, 19)
    assert Fraction(p.b) == Fraction(4, 3)
    assert Fraction(p.extreme_ratio()) == 4
    f = p.density()
    lo, hi = p.support()
    assert Fraction(f.integrate(lo, hi)) == Fraction(p.z)

    d = f.doubling_constant(2, depth=6)
    assert Fraction(d["constant"]) >= 1
    rh = f.rh_constant(3, 2, depth=4)
    assert Fraction(rh["constant_rth_power"]) >= 1

    linear = nadic.StepDensity([(0, 1, "1/2")], tail=1)
    assert Fraction(linear.integrate(0, 2)) == Fraction(3, 2)

    assert Fraction(nadic.covering_bound((0, "1/10"), ("1/10", "1/5"), 1000, 2)) == Fraction(100, 49)

    rep = nadic.run_config('mode = "lemma4"\nbases = [3]\nepsilon = "7/500"\nx_max = 50\n')
    assert rep["passed"], rep["failures"]
    print("smoke test passed")


if __name__ == "__main__":
    main()
