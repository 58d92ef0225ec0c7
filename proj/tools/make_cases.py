#!/usr/bin/env python3
"""Writes the constructed native cases into data/cases/.

Usage: python3 tools/make_cases.py [output_dir]
"""

import json
import pathlib
import sys

S_BASE = 100.0


def line(f, t, x, r=0.0, b_sh=0.0):
    y = 1.0 / complex(r, x)
    return {"from": f, "to": t, "g": y.real, "b": y.imag, "b_sh": b_sh}


def bus(i, kind="pq", kv=138.0):
    return {"id": i, "base_kv": kv, "kind": kind}


def gen(i, b, p_g, v_set, q_min, q_max, p_max, **extra):
    g = {"id": i, "bus": b, "p_g": p_g, "v_set": v_set, "q_min": q_min, "q_max": q_max, "p_min": 0.0, "p_max": p_max}
    g.update(extra)
    return g


def load(b, p, q):
    return {"bus": b, "p": p, "q": q}


def doc(buses, branches, generators, loads, **extra):
    d = {"format_version": 1, "s_base": S_BASE, "buses": buses, "branches": branches,
         "generators": generators, "loads": loads}
    d.update(extra)
    return d


def slack_gen(b=1, v_set=1.0):
    return gen(1, b, 0.0, v_set, -99.0, 99.0, 99.0)


def two_bus():
    return doc([bus(1, "slack"), bus(2)], [line(1, 2, 0.1, 0.01)], [slack_gen()], [load(2, 0.5, 0.1)])


def qlimit_3bus():
    # Generator 2 sits in the steep part of its reactive curve at the solution.
    return doc([bus(1, "slack"), bus(2, "pv"), bus(3)],
               [line(1, 2, 0.2, 0.02), line(2, 3, 0.1, 0.01), line(1, 3, 0.2, 0.02)],
               [slack_gen(), gen(2, 2, 0.1, 0.96, -0.39, 0.05, 9.0)],
               [load(3, 1.2, -0.2)])


def radial_feeder_10bus():
    x = [0.05, 1e-4, 1e-4, 0.1, 0.01, 1e-3, 1e-3, 0.1, 0.1]
    pl = [0.27, 0.29, 0.16, 0.15, 0.2, 0.04, 0.18, 0.17, 0.19]
    ql = [0.09, 0.0, 0.01, 0.04, 0.1, 0.12, 0.09, 0.14, 0.02]
    buses = [bus(1, "slack", 12.47)] + [bus(k, "pv" if k == 10 else "pq", 12.47) for k in range(2, 11)]
    branches = [line(k, k + 1, x[k - 1], 0.3 * x[k - 1]) for k in range(1, 10)]
    gens = [slack_gen(), gen(2, 10, 0.03, 0.96, -0.3, 0.48, 9.0)]
    return doc(buses, branches, gens, [load(k, pl[k - 2], ql[k - 2]) for k in range(2, 11)])


def oscillation_3bus():
    # Generators 2 and 3 each regulate the other's bus.
    return doc([bus(1, "slack"), bus(2, "pv"), bus(3, "pv")],
               [line(1, 2, 0.1), line(2, 3, 0.1), line(1, 3, 0.1)],
               [gen(1, 1, 0.0, 1.0, -9.99, 9.99, 10.0),
                gen(2, 2, 0.3, 1.03, -0.1, 0.3, 1.0, remote_bus=3, remote_factor=1.0),
                gen(3, 3, 0.3, 0.99, -0.45, 0.15, 2.0, remote_bus=2, remote_factor=1.0)],
               [load(2, 0.5, 0.0), load(3, 0.5, 0.25)])


def order_sensitivity_5bus():
    # Two cross-regulating generators whose violations interact; bus 5 is a
    # radial load off bus 4.
    return doc([bus(1, "slack"), bus(2, "pv"), bus(3, "pv"), bus(4), bus(5)],
               [line(1, 2, 0.1), line(2, 3, 0.2), line(1, 3, 0.2), line(2, 4, 0.1), line(3, 4, 0.1),
                line(4, 5, 0.05)],
               [gen(1, 1, 0.0, 1.0, -9.99, 9.99, 10.0),
                gen(2, 2, 0.4, 1.01, -0.41, 0.4, 1.0, remote_bus=3, remote_factor=1.0),
                gen(3, 3, 0.2, 1.05, -0.26, 0.31, 2.0, remote_bus=2, remote_factor=1.0)],
               [load(2, 0.3, 0.05), load(3, 0.3, 0.05), load(4, 0.3, 0.12), load(5, 0.1, 0.04)])


SAVNW_GENS = [  # id, bus, scheduled MW, P_max MW, kappa
    (101, 101, 750.0, 810.0, 0.23),
    (102, 102, 750.0, 810.0, 0.23),
    (206, 206, 800.0, 900.0, 0.25),
    (211, 211, 600.0, 616.0, 0.18),
    (3011, 3011, 257.74, 900.0, 0.08),
    (3018, 3018, 100.0, 117.0, 0.03),
]


def savnw_like(extra_load_mw=0.0):
    ids = [101, 102, 151, 152, 201, 205, 206, 211, 3001, 3002, 3011, 3018]
    buses = [bus(i, "slack" if i == 3011 else ("pv" if i in (101, 102, 206, 211, 3018) else "pq"), 500.0)
             for i in ids]
    pairs = [(101, 151, 0.004), (102, 151, 0.004), (151, 152, 0.003), (151, 201, 0.006), (152, 205, 0.006),
             (201, 205, 0.004), (206, 205, 0.004), (211, 201, 0.005), (152, 3001, 0.006), (3011, 3001, 0.003),
             (3001, 3002, 0.004), (3018, 3002, 0.006)]
    branches = [line(f, t, x, 0.1 * x, 0.02) for f, t, x in pairs]
    gens = [gen(i, b, p / S_BASE, 1.02, -6.0, 6.0, pmax / S_BASE, agc_factor=k)
            for i, b, p, pmax, k in SAVNW_GENS]
    loads = [load(152, 12.0, 3.0), load(205, 12.0, 3.0), load(3002, 8.3633 + extra_load_mw / S_BASE, 2.0)]
    return doc(buses, branches, gens, loads)


def discrete_5bus():
    branches = [line(1, 2, 0.05, 0.005), line(2, 4, 0.1, 0.01), line(4, 5, 0.15, 0.015)]
    xfmr = line(2, 3, 0.08)
    xfmr["tap"] = {"tr_min": 0.9, "tr_max": 1.1, "v_set": 1.0, "controlled_side": "secondary",
                   "step_size": 0.0125}
    branches.insert(1, xfmr)
    return doc([bus(1, "slack"), bus(2), bus(3), bus(4), bus(5)], branches, [slack_gen(v_set=1.02)],
               [load(3, 0.8, 0.3), load(4, 0.3, 0.1), load(5, 0.6, 0.35)],
               switched_shunts=[{"bus": 5, "b_min": 0.0, "b_max": 1.5, "step_size": 0.15, "v_set": 1.0}])


CASES = {
    "two_bus.json": two_bus,
    "qlimit_3bus.json": qlimit_3bus,
    "radial_feeder_10bus.json": radial_feeder_10bus,
    "oscillation_3bus.json": oscillation_3bus,
    "order_sensitivity_5bus.json": order_sensitivity_5bus,
    "savnw_like.json": savnw_like,
    "savnw_like_heavy.json": lambda: savnw_like(extra_load_mw=1200.0),
    "discrete_5bus.json": discrete_5bus,
}


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "data" / "cases")
    out.mkdir(parents=True, exist_ok=True)
    for name, build in CASES.items():
        (out / name).write_text(json.dumps(build(), indent=1) + "\n")
        print(out / name)


if __name__ == "__main__":
    main()
