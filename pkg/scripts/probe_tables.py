"""Degeneracy scoreboard for the planar tables and the coupled block.

Prints, per table problem, the range-coverage verdict, the domain check,
the interval regularity condition, and the multiplicity tally; then probes
the coupled block for the monotone/not-monotone split and estimates its
kernel Lipschitz modulus.
"""

import argparse

from degenppa.builtins import get_problem
from degenppa.verify import check_restricted_monotonicity, run_check

TABLES = ("eg1", "eg2", "eg3", "l1x", "l1y")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000, help="pairs per sampled check")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for name in TABLES:
        prob = get_problem(name)
        print(f"{name}:")
        for check in ("minty", "fulldomain", "sri", "single"):
            rep = run_check(prob, check, n=args.n, seed=args.seed)
            verdict = "ok" if rep.clean else f"{rep.n_violations} violations"
            print(f"  {check:10s} {verdict:16s} {rep.notes}")

    prob = get_problem("counter-block")
    print("counter-block:")
    plain = check_restricted_monotonicity(prob.op, prob.metric,
                                          n_pairs=args.n, seed=args.seed,
                                          restricted=False)
    tight = check_restricted_monotonicity(prob.op, prob.metric,
                                          n_pairs=args.n, seed=args.seed)
    print(f"  unrestricted pairs: {plain.n_violations}/{plain.n_samples} "
          f"violations, worst margin {plain.worst_margin:.3g}")
    print(f"  restricted pairs:   {tight.n_violations}/{tight.n_samples} "
          f"violations")
    lip = run_check(prob, "lipschitz", n=args.n, seed=args.seed)
    print(f"  lipschitz           {lip.notes}")


if __name__ == "__main__":
    main()
