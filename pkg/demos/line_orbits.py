"""One-parameter persistence has no moduli.

Over k[x] a module is a sum of bars, so fixing the generator and relation
degrees should leave finitely many isomorphism types no matter the field.
The script enumerates relation families for two bars born at 0 and one at
2, with a single relation at 4, over several fields: the family count
grows like q^2 + q + 1 but the orbit count stays at two, and the same
q-independence shows up for random inputs.
"""

import numpy as np

from torpers import grading, orbits

XI0 = {(0,): 2, (2,): 1}
XI1 = {(4,): 1}


def main():
    print("xi_0 = %s, xi_1 = %s" % (XI0, XI1))
    for q in (2, 3, 5, 7):
        report = orbits.classify(XI0, XI1, q)
        sizes = sorted(o.size for o in report.orbits)
        print("GF(%d): %3d families, %d orbits, sizes %s"
              % (q, sum(sizes), len(report.orbits), sizes))
    print("two orbits every time: the relation either touches the late bar")
    print("or it does not; all q^2 families that touch it are equivalent.")

    print("\nrandom single-parameter inputs:")
    rng = np.random.default_rng(11)
    for case in range(4):
        gens = sorted((int(rng.integers(0, 3)),)
                      for _ in range(int(rng.integers(2, 4))))
        top = max(g[0] for g in gens) + int(rng.integers(1, 4))
        xi0 = grading.multiset_from_list(gens)
        xi1 = {(top,): int(rng.integers(1, 3))}
        counts = [len(orbits.classify(xi0, xi1, q).orbits) for q in (2, 3, 5)]
        print("  xi_0=%s xi_1=%s -> orbit counts %s over GF(2),GF(3),GF(5)"
              % (dict(xi0), xi1, counts))


if __name__ == "__main__":
    main()
