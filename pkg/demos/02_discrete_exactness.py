"""Exactness for discrete measures.

For atomic measures with m1 and m2 atoms on the line, the hierarchy reaches
the exact TV distance at level n = max(m1, m2).  In particular two measures
with disjoint supports are detected as mutually singular (TV = 2) no matter
how close their atoms are.
"""

from tvbound import Atomic, exact_tv_atomic, solve_hierarchy

cases = {
    "disjoint supports": (
        Atomic.univariate([-1.0, 0.0, 1.0, 2.0], [0.25] * 4),
        Atomic.univariate([-0.7, 0.3, 1.3, 2.3], [0.25] * 4),
    ),
    "one common atom": (
        Atomic.univariate([-1.0, 0.0, 1.0, 2.0], [0.25] * 4),
        Atomic.univariate([-2.0, -1.0, 0.1, 1.5], [0.25] * 4),
    ),
    "close atoms, one common": (
        Atomic.univariate([0.0, 0.3, 0.4, 0.9], [0.25] * 4),
        Atomic.univariate([0.3, 0.6, 0.7, 1.2], [0.25] * 4),
    ),
    "two nearby diracs": (
        Atomic.univariate([0.0], [1.0]),
        Atomic.univariate([0.01], [1.0]),
    ),
}

for name, (mu, nu) in cases.items():
    exact = exact_tv_atomic(mu, nu)
    n_star = max(len(mu.weights), len(nu.weights))
    sweep = solve_hierarchy(mu, nu, levels=range(1, n_star + 1))
    print(f"{name}: exact TV = {exact}")
    for res in sweep:
        tag = "  <- exact from here" if res.level == n_star else ""
        print(f"   n={res.level}: rho_n = {res.rho:.9f}{tag}")
    print()
