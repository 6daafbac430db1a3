#!/usr/bin/env python3
"""Smoke test for the orabench_py extension module.

Builds are not triggered from here; compile the module first with

    cargo build -p orabench-py

then run this script with any Python 3. It copies the shared library next to
itself under the importable name and drives one pass over the bound API.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "debug" / "liborabench_py.so",
        root / "target" / "release" / "liborabench_py.so",
    ]
    src = next((p for p in candidates if p.exists()), None)
    if src is None:
        sys.exit("liborabench_py.so not found; run `cargo build -p orabench-py` first")
    tmp = Path(tempfile.mkdtemp(prefix="orabench_py_"))
    shutil.copy2(src, tmp / "orabench_py.so")
    sys.path.insert(0, str(tmp))
    import orabench_py

    return orabench_py


def main():
    ob = load_module()

    # Generate a small instance and check the JSON round trip.
    cfg = {"family": "nonidentical", "n": 40, "m": 2, "epsilon": 0.25, "seed": 7}
    inst = ob.generate(json.dumps(cfg))
    assert inst.n == 40 and inst.m == 2
    assert inst.validate() == []
    again = ob.Instance.from_json(inst.to_json())
    assert again.to_json() == inst.to_json()
    print("ok: generate + json round trip")

    # Full-information pricing stays within budget and under the LP bound.
    ub = ob.lp_upper_bound(inst)
    est = ob.known_distribution_estimates(inst, 0.25)
    assert 0.0 < est.opt_hat <= ub + 1e-9
    assert len(est.a_hat) == inst.n and len(est.a_hat[0]) == inst.m
    trace = ob.run_pricing(inst, est, 0.25, seed=1)
    assert trace.max_utilization <= 1.0 + 1e-9
    assert trace.guard_activations == 0
    assert 0.0 < trace.total_value <= ub * 1.5
    assert len(trace.prices()) == trace.stop_time
    print(f"ok: pricing run (value {trace.total_value:.3f}, lp_ub {ub:.3f})")

    # Single-sample pipeline: estimates then a fresh seeded run.
    ss = ob.single_sample_estimates(inst, 0.25, seed=3)
    assert ss.beta == 1.0 and len(ss.a_hat) == inst.n
    run = ob.run_single_sample(inst, 0.25, seed=3)
    assert run.max_utilization <= 1.0 + 1e-9
    print(f"ok: single-sample run (value {run.total_value:.3f})")

    # Determinism: identical seeds give identical traces.
    a = ob.run_single_sample(inst, 0.25, seed=11).to_json()
    b = ob.run_single_sample(inst, 0.25, seed=11).to_json()
    assert a == b
    print("ok: seeded reproducibility")

    # A zero augmentation plan reproduces the plain run exactly.
    plain = ob.run_pricing(inst, est, 0.25, seed=5)
    augmented, base_value = ob.run_augmented(inst, "[]", 0.25, seed=5)
    assert augmented.to_json() == plain.to_json()
    assert abs(base_value - plain.total_value) < 1e-12
    print("ok: zero-plan augmentation identity")

    # Hard instance: exact optimum inside [5B, 7B].
    hard = ob.gen_hard(1, 4)
    opts = [hard.offline_opt(seed) for seed in range(20)]
    assert all(20.0 - 1e-9 <= v <= 28.0 + 1e-9 for v in opts)
    assert hard.instance().validate() == []
    print(f"ok: hard instance optima in [{min(opts)}, {max(opts)}] vs [20, 28]")

    # Certificates and tail bounds.
    slack, holds = ob.no_regret_min_slack([0.5, -1.0, 0.25], 1.0, 0.1)
    assert holds and slack >= -1e-9
    assert abs(ob.hoeffding_bound(100, 0.0, 1.0, 0.2) - 2.0 * math.exp(-8.0)) < 1e-12
    assert ob.bernstein_bound(10.0, 1.0, 10.0) == math.exp(-50.0 / 40.0 * 3.0)
    assert ob.swor_bound(10, 10, 1.0, 0.5, 1.0) <= 2.0
    print("ok: certificate and tail bounds")

    # Whole experiment through the harness, report returned as JSON.
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
        f.write(inst.to_json())
        inst_path = f.name
    exp = {
        "algorithm": "single_sample",
        "source": {"instance_file": inst_path},
        "trials": 8,
        "seed": 42,
        "epsilon": 0.25,
    }
    report = json.loads(ob.run_experiment_json(json.dumps(exp)))
    rows = report["rows"]
    assert len(rows) == 8
    assert all(r["error"] is None for r in rows)
    ratios = [r["ratio"] for r in rows]
    assert all(0.0 < r <= 1.2 for r in ratios)
    print(f"ok: experiment report (mean ratio {sum(ratios) / len(ratios):.3f})")

    print("smoke test passed")


if __name__ == "__main__":
    main()
