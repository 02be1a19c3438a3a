#!/usr/bin/env python3
"""Smoke test for the isacnet extension module.

Build the module with `cargo build -p isacnet-py --release`, copy
target/release/libisacnet.so to python/isacnet.so, then run

    PYTHONPATH=python python3 python/smoke.py
"""

import math

import isacnet


def check(label, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"  {label}: {status} {detail}")
    if not ok:
        raise SystemExit(f"smoke test failed at {label}")


def main():
    s = isacnet.Scenario()
    s.validate()
    print(repr(s))
    check("default density", s.lambda_b == 1e-5)

    parsed = isacnet.Scenario.parse("lambda_b = 2e-5\nh_t = 50.0\n")
    check("parse override", parsed.lambda_b == 2e-5 and parsed.h_t == 50.0)

    original = s.gamma_c_db
    s.gamma_c_db = 3.0
    check("setter roundtrip", s.gamma_c_db == 3.0)
    s.gamma_c_db = original

    a = isacnet.analyze(s, quad_order=20)
    print("analyze:", a)
    check("coverage_comm in [0,1]", 0.0 <= a["coverage_comm"] <= 1.0)
    check("coverage_radar in [0,1]", 0.0 <= a["coverage_radar"] <= 1.0)
    check("ee positive", a["ee"] > 0.0)

    m = isacnet.simulate(s, trials=2000, seed=1)
    mean, lo, hi = m["ee"]
    print(f"simulate: ee = {mean:.1f} [{lo:.1f}, {hi:.1f}]")
    check("ci ordered", lo <= mean <= hi)
    check("mc coverage in [0,1]", 0.0 <= m["coverage_comm"][0] <= 1.0)
    check("mc deterministic", m == isacnet.simulate(s, trials=2000, seed=1))

    results = {}
    for mode in ("comm", "radar", "isac"):
        r = isacnet.optimize(s, mode=mode)
        results[mode] = r
        print(f"optimize[{mode}]: lambda* = {r['lambda_star']:.4e} "
              f"ee* = {r['ee_star']:.1f} via {r['method']}")
        check(f"{mode} converged", r["converged"])
        check(f"{mode} density positive", r["lambda_star"] > 0.0)
        check(f"{mode} radius finite", math.isfinite(r["cell_radius_m"]))

    check("comm optimum closed form",
          results["comm"]["method"] == "closed_form_comm")
    check("radar optimum from cubic",
          results["radar"]["method"] == "closed_form_radar_cubic")

    try:
        isacnet.optimize(s, mode="bogus")
    except ValueError as e:
        check("bad mode rejected", "bogus" in str(e))
    else:
        raise SystemExit("bad mode was accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
