"""Smoke test for the twodsd Python extension.

Build and install first, for example:

    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/twodsd-*.whl
"""

import math
import random

import twodsd


def main():
    x1 = twodsd.Sample([1.0, 2.0, 3.0])
    x2 = twodsd.Sample([2.0, 3.0, 4.0])
    assert len(x1) == 3 and x1.mean == 2.0

    idx = twodsd.index(x1, x2)
    assert math.isclose(idx.signed, 1.0) and math.isclose(idx.abs, 1.0)
    assert idx.mvr() == 0.0
    assert idx.mvr("second_dominated") == 1.0
    assert idx.classify(0.1) == "on_l1"

    # Plain lists work wherever a Sample is expected.
    assert twodsd.mvr([0.0, 1.0], [0.5, 1.5]) == 0.0

    oracle = twodsd.oracle("2")
    assert abs(oracle["epsilon0"] - 0.036160) < 1e-4, oracle

    a, b = twodsd.draw_pair("1", 2000, seed=3)
    assert len(a) == len(b) == 2000

    rng = random.Random(1)
    low = [rng.lognormvariate(0.0, 0.5) for _ in range(1500)]
    high = [v * 1.5 for v in low]
    result = twodsd.run_test(low, high, 0.05, replicates=300, seed=7)
    assert result["reject"] is True, result
    again = twodsd.run_test(low, high, 0.05, replicates=300, seed=7, workers=1)
    assert again == result

    try:
        twodsd.run_test(low, high, 0.7)
    except twodsd.TwodsdError as e:
        assert "epsilon" in str(e)
    else:
        raise AssertionError("epsilon outside [0, 0.5) must raise")

    curve = twodsd.power_curve("2", [0.0, 0.2], n=500, runs=8, replicates=100, seed=1)
    assert curve["rejection_rate"][0] <= curve["rejection_rate"][1]

    print("twodsd smoke test passed")


if __name__ == "__main__":
    main()
