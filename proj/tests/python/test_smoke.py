"""Smoke tests for the python bindings. Plain asserts, no test framework."""

import json
import math
import os
import sys
import tempfile

import specflow as sf


def test_mollifier():
    assert sf.mollifier_phi(0.0, 0.3) == 0.0
    assert abs(sf.mollifier_phi(-1.7, 0.2) + sf.mollifier_phi(1.7, 0.2)) < 1e-15
    for R in (1.0, 2.0, 3.0):
        t = 1e-2
        lhs = abs(math.sqrt(t) * sf.mollifier_phi(R / math.sqrt(t), t) - math.sqrt(math.pi / 4))
        assert lhs <= math.exp(-R * R) / (2 * R) + 1e-12


def test_forms_algebra():
    a = sf.contact_form(1.0)
    ada = sf.wedge_json(a, sf.ext_d_json(a))
    re, im = sf.integrate_top_json(ada)
    # i(cos dx1 + sin dx2): integral of a ^ da is +2*pi (i^2 flips the real form's -2*pi)
    assert abs(re - 2 * math.pi) < 1e-12
    assert abs(im) < 1e-12
    assert abs(sf.leading_order_json(a, 3.0) + 9.0 / (16 * math.pi)) < 1e-12


def test_winding_flow():
    conn = sf.connection(1, [0.9])
    res = sf.exact_flow(conn, [2 * math.pi * 2], K=8, samples=64)
    assert res["f"] == 2
    assert len(res["crossings"]) == 2
    end = sf.connection(1, [0.9 + 2 * math.pi * 2])
    assert abs(sf.prediction(conn, end) - 2.0) < 1e-12
    est = sf.estimator_flow(conn, [2 * math.pi * 2], K=8, samples=48)
    assert abs(est["value"] - 2.0) <= est["n"] + 1e-9


def test_spectrum_and_heat():
    conn = sf.connection(1, [0.0])
    vals = sf.eigenvalues(conn, 8)
    assert min(abs(v) for v in vals) < 1e-12  # lambda = 0 sits in the window
    tr = sf.heat_trace(conn, 40, 0.01)
    assert abs(tr - (4 * math.pi * 0.01) ** -0.5) / tr < 1e-6
    assert sf.count_eigs(conn, 40, 7.0) == 3


def test_experiment_runner():
    out = tempfile.mkdtemp(prefix="specflow_py_")
    rep = sf.run_experiment("chs-check", {"out": out, "seed": 7})
    assert rep["ok"], rep["lines"]
    assert os.path.exists(os.path.join(out, "chs-check", "summary.json"))
    summary = json.loads(rep["summary"])
    assert summary["experiment"] == "chs-check"


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"{t.__name__}: ok")
    print("python smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
