#!/usr/bin/env python3
"""Smoke test for the confspace_py extension module.

Build the module first, then run this script:

    cargo build -p confspace-py --release
    python3 python/smoke_test.py
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    """Copy the built cdylib next to a temp dir under the importable name."""
    for profile in ("release", "debug"):
        built = ROOT / "target" / profile / "libconfspace_py.so"
        if built.exists():
            tmp = Path(tempfile.mkdtemp(prefix="confspace_py_"))
            shutil.copy2(built, tmp / "confspace_py.so")
            sys.path.insert(0, str(tmp))
            import confspace_py

            return confspace_py
    raise SystemExit(
        "libconfspace_py.so not found; run `cargo build -p confspace-py --release` first"
    )


def main():
    m = load_module()
    print(f"confspace_py {m.__version__}")

    # p-adic arithmetic: |5|_5 = 1/5, |10/9|_3 = 9, 1 + 2 has |.|_3 = 1/3
    assert m.PAdic(5, 5).abs() == 0.2
    assert m.PAdic(3, 10, 9).abs() == 9.0
    s = m.PAdic(3, 1).add(m.PAdic(3, 2))
    assert s.abs() == 1.0 / 3.0
    assert m.PAdic.parse(s.text()) == s
    x = m.PAdic(3, 22, 7)
    assert x.sub(x).abs() == 0.0

    # matching metric: {0,10} vs {1,11} pairs nearest-to-nearest
    assert m.matching_distance([0.0, 10.0], [1.0, 11.0]) == 2.0
    assert m.delta_distance([0.0, 2.0], [0.0, 4.0]) == 0.25
    # {1, 3} vs {1, 9}: the bottleneck pairing matches 1 to 1 and 3 to 9,
    # and |3 - 9|_3 = |6|_3 = 1/3
    d = m.matching_distance_padic(3, ["3:0:1", "3:1:1"], ["3:0:1", "3:2:1"])
    assert d == 1.0 / 3.0, d

    # Poisson count law: P(N_B = 3) for a mass-2 region is 8 e^{-2} / 6
    law = m.PoissonLaw(0.0, 4.0, intensity=1.0, seed=42)
    p = law.count_probability([(0.0, 2.0)], [3])
    assert p == 8.0 * math.exp(-2.0) / 6.0, p
    counts = [len(law.sample()) for _ in range(4000)]
    mean = sum(counts) / len(counts)
    assert abs(mean - 4.0) < 0.15, mean

    # spherical function of a doubling map: both modes agree, and the
    # intensity-scaling law holds
    uq, _ = law.spherical_u([0.0, 1.0, 3.0], [0.0, 2.0, 3.0])
    um, se = law.spherical_u([0.0, 1.0, 3.0], [0.0, 2.0, 3.0], mode="monte_carlo", samples=40000)
    assert abs(uq - um) < max(3 * se, 1e-3), (uq, um, se)

    # Hellinger affinity of N(0,1) and N(2,1) is exp(-1/2)
    a = m.hellinger_normal(0.0, 1.0, 2.0, 1.0)
    assert abs(a - math.exp(-0.5)) < 1e-8, a

    # a whole verification suite, end to end
    spec = {
        "schema": "confspace-experiment/1",
        "suite": "metrics",
        "seed": 7,
        "samples": 500,
    }
    report = json.loads(m.run_suite_json(json.dumps(spec)))
    assert report["pass"] is True
    assert report["schema"] == "confspace-report/1"
    print(f"suite `{report['suite']}` passed {len(report['checks'])} checks")

    print("smoke test passed")


if __name__ == "__main__":
    main()
