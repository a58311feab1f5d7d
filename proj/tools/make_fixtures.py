#!/usr/bin/env python3
"""Regenerates the JSON fixtures under fixtures/.

Topology and fault structure follow the two published test systems; every
value the published description leaves open (coordinates, demands, costs,
impedances, durations) is synthesized here and flagged in each file's meta.
"""

import json
import math
import random
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

SYNTH_NOTE = ("Coordinates, demands, costs, impedances, capacities and repair "
              "durations are synthesized. PGV is in cm/s, pipeline lengths in km, "
              "nodal pressures normalized to [1, 2].")


def write(name, doc):
    path = OUT / name
    path.write_text(json.dumps(doc, indent=2) + "\n")
    print("wrote", path)


def bus(i, p, q, cost, x, y):
    return {"id": f"B{i}", "p": p, "q": q, "cost": cost, "v_min": 0.9, "v_max": 1.1,
            "x": x, "y": y}


def line(name, a, b, r=0.002, x=0.002, cap=20.0):
    return {"id": name, "from": f"B{a}", "to": f"B{b}", "r": r, "x": x,
            "p_max": cap, "q_max": cap}


def gnode(i, demand, cost, x, y, signal="none"):
    return {"id": f"N{i}", "demand": demand, "cost": cost, "pressure_min": 1.0,
            "pressure_max": 2.0, "x": x, "y": y, "signal": signal}


def pipe(name, a, b, length, f_max=20.0, weymouth=400.0, pos=None):
    p = {"id": name, "from": f"N{a}", "to": f"N{b}", "length_km": length,
         "class": "inactive", "weymouth": weymouth, "f_max": f_max}
    if pos is not None:
        p["pos"] = list(pos)
    return p


def case13x7():
    buses = [
        bus(1, 0.0, 0.0, 0, 0, 10),
        bus(2, 0.6, 0.2, 120, 2, 10),
        bus(3, 0.5, 0.2, 120, 4, 10),
        bus(4, 0.5, 0.2, 120, 6, 10),
        bus(5, 0.6, 0.2, 160, 2, 8),
        bus(6, 1.0, 0.3, 240, 2, 6),
        bus(7, 1.2, 0.4, 300, 4, 6),
        bus(8, 0.5, 0.2, 120, 6, 6),
        bus(9, 0.5, 0.2, 120, 0, 8),
        bus(10, 0.8, 0.3, 180, 0, 6),
        bus(11, 0.8, 0.3, 180, 0, 4),
        bus(12, 0.6, 0.2, 140, 2, 4),
        bus(13, 0.5, 0.2, 120, 4, 4),
    ]
    lines = [
        line("F1", 1, 2), line("F2", 2, 3), line("L1", 3, 4),
        line("F3", 2, 5), line("F4", 5, 6), line("L2", 6, 7),
        line("F5", 7, 8), line("F6", 1, 9), line("F7", 9, 10),
        line("L3", 10, 11), line("F8", 11, 12), line("F9", 12, 13),
    ]
    gens = [
        {"id": "G0", "bus": "B1", "p_max": 12.0, "q_max": 6.0},
        {"id": "G1", "bus": "B7", "p_max": 2.5, "q_max": 1.0,
         "gas": {"node": "N2", "beta": 1.0, "gamma": 0.0}},
        {"id": "G2", "bus": "B11", "p_max": 1.8, "q_max": 0.8,
         "gas": {"node": "N4", "beta": 1.0, "gamma": 0.0}},
    ]
    nodes = [
        gnode(1, 3.0, 100, 9, 0, "user_report"),
        gnode(2, 0.0, 0, 6, 0, "generator_flag"),
        gnode(3, 1.5, 60, 3, -6, "user_report"),
        gnode(4, 0.0, 0, 0, -3, "generator_flag"),
        gnode(5, 0.0, 0, 3, 0),
        gnode(6, 0.0, 0, 0, 0),
        gnode(7, 0.5, 20, 4, -2),
    ]
    pipes = [
        pipe("P1", 5, 7, 1.5, pos=(0.5, -6.0)),
        pipe("P2", 5, 2, 6.0, pos=(2.0, -4.0)),
        pipe("P3", 6, 5, 1.5, pos=(-1.0, -3.0)),
        pipe("P4", 6, 4, 3.0, pos=(3.9, -3.8)),
        pipe("P5", 4, 3, 3.0, pos=(3.0, -7.0)),
        pipe("P6", 2, 1, 3.0),
    ]
    status = {
        "F1": {"state": "faulty", "repair_steps": 5},
        "F2": {"state": "faulty", "repair_steps": 4},
        "F3": {"state": "faulty", "repair_steps": 5},
        "F4": {"state": "faulty", "repair_steps": 5},
        "F5": {"state": "faulty", "repair_steps": 4},
        "F6": {"state": "faulty", "repair_steps": 5},
        "F7": {"state": "faulty", "repair_steps": 4},
        "F8": {"state": "faulty", "repair_steps": 5},
        "F9": {"state": "faulty", "repair_steps": 4},
        "P1": {"state": "unknown", "inspect_steps": 1, "repair_steps": 3},
        "P2": {"state": "unknown", "inspect_steps": 1, "repair_steps": 5},
        "P3": {"state": "unknown", "inspect_steps": 1, "repair_steps": 3},
        "P4": {"state": "faulty", "repair_steps": 4},
        "P5": {"state": "faulty", "repair_steps": 3},
    }
    crews = [
        {"id": "PC1", "type": "power", "depot": {"x": 0, "y": 9}},
        {"id": "PC2", "type": "power", "depot": {"x": 2, "y": 9}},
        {"id": "GC1", "type": "gas", "depot": {"x": 2.0, "y": -7.0}},
    ]
    doc = {
        "name": "case13x7",
        "meta": {"description": "13-bus / 7-node coupled distribution system",
                 "synthesis": SYNTH_NOTE},
        "power": {"base_voltage": 1.0, "buses": buses, "lines": lines, "generators": gens},
        "gas": {"nodes": nodes, "wells": [{"id": "W1", "node": "N6", "min": 0, "max": 20}],
                "pipelines": pipes},
        "status": status,
        "crews": crews,
        "travel": {"mode": "euclidean", "speed": 1.0},
        "time": {"dt_hours": 0.5, "horizon_steps": 48},
        "hazard": {"pgv": 40.0},
    }
    write("case13x7.json", doc)
    write("case13x7_truth.json", {"pipelines": {"P1": "intact", "P2": "faulty", "P3": "intact"}})


def case123x20():
    rng = random.Random(123)
    # Substation at B1; a trunk running east with laterals north and south.
    buses, lines, pos = [], [], {}
    trunk = list(range(1, 13))
    for k, b in enumerate(trunk):
        pos[b] = (2.0 * k, 0.0)
    parent = {b: b - 1 for b in trunk[1:]}
    nxt = 13
    lateral_heads = []
    while nxt <= 123:
        for k, tb in enumerate(trunk[1:], start=1):
            if nxt > 123:
                break
            side = 1 if (k + len(lateral_heads)) % 2 == 0 else -1
            length = rng.randint(3, 7)
            prev = tb
            depth0 = sum(1 for h in lateral_heads if h[0] == tb)
            x0 = pos[tb][0] + 0.6 * depth0
            for d in range(1, length + 1):
                if nxt > 123:
                    break
                pos[nxt] = (x0 + 0.3 * (d % 2), side * (1.0 + 1.1 * d))
                parent[nxt] = prev
                if prev == tb:
                    lateral_heads.append((tb, nxt))
                prev = nxt
                nxt += 1
    for b in range(1, 124):
        load = 0.0 if b == 1 else round(rng.uniform(0.05, 0.2), 3)
        cost = 0 if b == 1 else rng.choice([40, 60, 80, 100, 150, 200])
        buses.append(bus(b, load, round(load * 0.3, 3), cost, *pos[b]))

    # Faults: trunk sections and the heads of the longer laterals.
    trunk_faults = [3, 5, 7, 9, 11]
    heads = sorted(lateral_heads, key=lambda h: -sum(1 for c in parent if _ancestor(parent, c, h[1])))
    lateral_faults = [h[1] for h in heads[:12]]
    faulty_children = set(trunk_faults) | set(lateral_faults)
    fidx, lidx = 1, 1
    status = {}
    for child in sorted(parent):
        if child in faulty_children:
            name = f"F{fidx}"
            fidx += 1
            status[name] = {"state": "faulty", "repair_steps": rng.randint(2, 5)}
        else:
            name = f"L{lidx}"
            lidx += 1
        lines.append(line(name, parent[child], child, r=0.001, x=0.001, cap=30.0))
    assert fidx - 1 == 17, fidx

    # Gas: two wells, 20 nodes, a tree of 19 pipelines plus one tie.
    gpos = {1: (4.0, -14.0), 2: (14.0, -14.0)}
    gparent = {}
    for j in range(3, 21):
        root = 1 if j % 2 else 2
        cand = [k for k in gpos if (k % 2 == j % 2 or k in (1, 2)) and k != j]
        par = rng.choice(cand[-4:]) if len(cand) > 1 else root
        px, py = gpos[par]
        gpos[j] = (round(px + rng.uniform(-3, 3), 2), round(py - rng.uniform(1.5, 3.0), 2))
        gparent[j] = par
    gen_nodes = [4, 6, 9, 11, 13, 15, 17, 19]
    nodes = []
    for j in range(1, 21):
        if j in gen_nodes:
            nodes.append(gnode(j, 0.0, 0, *gpos[j], "generator_flag"))
        elif j in (1, 2):
            nodes.append(gnode(j, 0.0, 0, *gpos[j]))
        else:
            d = round(rng.uniform(0.3, 1.2), 2)
            nodes.append(gnode(j, d, rng.choice([20, 40, 60]), *gpos[j],
                               "user_report" if rng.random() < 0.7 else "none"))
    pipes = []
    for k, j in enumerate(range(3, 21), start=1):
        a = gparent[j]
        length = round(rng.uniform(1.0, 5.0), 1)
        mx = (gpos[a][0] + gpos[j][0]) / 2
        my = (gpos[a][1] + gpos[j][1]) / 2
        pipes.append(pipe(f"P{k}", a, j, length, f_max=30.0, weymouth=600.0, pos=(mx, my)))
    pipes.append(pipe("P19", 1, 2, 6.0, f_max=30.0, weymouth=600.0, pos=(9.0, -14.0)))
    for name in ("P3", "P4", "P6", "P9"):
        status[name] = {"state": "faulty", "repair_steps": rng.randint(3, 5)}
    for name in ("P1", "P2", "P5", "P7", "P8", "P10", "P11"):
        status[name] = {"state": "unknown", "inspect_steps": 1, "repair_steps": rng.randint(3, 5)}

    # Gas units sit on lateral buses so they can carry islands.
    island_buses = [h[1] for h in heads[:8]]
    gens = [{"id": "G0", "bus": "B1", "p_max": 40.0, "q_max": 20.0}]
    for g, (b, n) in enumerate(zip(island_buses, gen_nodes), start=1):
        gens.append({"id": f"G{g}", "bus": f"B{b + 1}", "p_max": 0.6, "q_max": 0.3,
                     "gas": {"node": f"N{n}", "beta": 1.0, "gamma": 0.0}})

    crews = [
        {"id": "PC1", "type": "power", "depot": {"x": 0, "y": 2}},
        {"id": "PC2", "type": "power", "depot": {"x": 10, "y": 2}},
        {"id": "PC3", "type": "power", "depot": {"x": 20, "y": 2}},
        {"id": "GC1", "type": "gas", "depot": {"x": 4.0, "y": -15.0}},
        {"id": "GC2", "type": "gas", "depot": {"x": 14.0, "y": -15.0}},
    ]
    doc = {
        "name": "case123x20",
        "meta": {"description": "123-bus / 20-node coupled distribution system",
                 "synthesis": SYNTH_NOTE + " Feeder and gas-tree layout are generated (seed 123)."},
        "power": {"base_voltage": 1.0, "buses": buses, "lines": lines, "generators": gens},
        "gas": {"nodes": nodes,
                "wells": [{"id": "W1", "node": "N1", "min": 0, "max": 20},
                          {"id": "W2", "node": "N2", "min": 0, "max": 20}],
                "pipelines": pipes},
        "status": status,
        "crews": crews,
        "travel": {"mode": "euclidean", "speed": 2.0},
        "time": {"dt_hours": 0.5, "horizon_steps": 80},
        "hazard": {"pgv": 40.0},
    }
    write("case123x20.json", doc)
    truth = {n: "faulty" if n in ("P1", "P5", "P7", "P10") else "intact"
             for n in ("P1", "P2", "P5", "P7", "P8", "P10", "P11")}
    write("case123x20_truth.json", {"pipelines": truth})


def _ancestor(parent, node, anc):
    while node in parent:
        if node == anc:
            return True
        node = parent[node]
    return node == anc


def minimal():
    doc = {
        "name": "minimal",
        "meta": {"description": "one bus, one gas node, nothing damaged"},
        "power": {"buses": [bus(1, 1.0, 0.2, 50, 0, 0)], "lines": [],
                  "generators": [{"id": "G1", "bus": "B1", "p_max": 2.0, "q_max": 1.0}]},
        "gas": {"nodes": [gnode(1, 1.0, 10, 0, 0)],
                "wells": [{"id": "W1", "node": "N1", "min": 0, "max": 5}], "pipelines": []},
        "status": {},
        "crews": [],
        "travel": {"mode": "euclidean", "speed": 1.0},
        "time": {"dt_hours": 0.5, "horizon_steps": 4},
        "hazard": {"pgv": 0.0},
    }
    write("minimal.json", doc)
    bad = json.loads(json.dumps(doc))
    bad["name"] = "dangling_endpoint"
    bad["power"]["lines"] = [line("F1", 1, 99)]
    write("invalid_endpoint.json", bad)


def main():
    OUT.mkdir(exist_ok=True)
    case13x7()
    minimal()
    if "--no-case2" not in sys.argv:
        case123x20()


if __name__ == "__main__":
    main()
