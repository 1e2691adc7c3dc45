"""Run the acceptance criteria and print one line each.

    python scripts/run_acceptance.py           # all ten
    python scripts/run_acceptance.py 6 8       # a subset
"""
import sys

from henonlab.acceptance import run_all


def main():
    nums = [int(a) for a in sys.argv[1:]] or None
    results = []
    for res in run_all(nums):
        print(res.line(), flush=True)
        results.append(res)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
