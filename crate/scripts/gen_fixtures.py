#!/usr/bin/env python3
"""Regenerates fixtures/*.json. Run from the repository root."""

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def machine(states, initial, table):
    """table: {(state, move): (next, output)}"""
    delta = {f"{q},{m}": t for (q, m), (t, _) in table.items()}
    lam = {f"{q},{m}": o for (q, m), (_, o) in table.items()}
    return {"states": states, "initial": initial, "delta": delta, "lambda": lam}


def memoryless(moves, f):
    return machine(["s"], "s", {("s", m): ("s", f(m)) for m in moves})


def game(players, actions, moves, act, observations, observers, comm, colors, coloring, condition):
    comm_full = {o: comm.get(o, []) for o in observations}
    return {
        "schema_version": 1,
        "players": players,
        "actions": actions,
        "moves": moves,
        "act": act,
        "observations": observations,
        "observers": observers,
        "comm": comm_full,
        "colors": colors,
        "coloring": coloring,
        "condition": condition,
    }


def peek():
    moves = ["a", "b", "c"]
    p0 = memoryless(moves, lambda m: "c" if m == "c" else "⊥")
    p1 = memoryless(moves, lambda m: m)
    # parity of the number of a's, revealed as win/lose on c
    t = {}
    for q in ["even", "odd"]:
        t[(q, "a")] = ("odd" if q == "even" else "even", "n")
        t[(q, "b")] = (q, "n")
        t[(q, "c")] = (q, "win" if q == "even" else "lose")
    return game(
        2,
        ["x", "y"],
        moves,
        {"a": "x", "b": "x", "c": "y"},
        ["⊥", "a", "b", "c"],
        [p0, p1],
        {"c": [[0, 1]]},
        ["n", "win", "lose"],
        machine(["even", "odd"], "even", t),
        {"kind": "reachability", "targets": ["win"]},
    )


def sync_reach(link):
    moves = ["sA", "sB", "gA", "gB"]
    act = {"sA": "w", "sB": "w", "gA": "gA", "gB": "gB"}
    # player 0: blind in round 1, "sync" (or ⊥) in round 2, guess outcome in round 3
    t = {}
    for m in ["gA", "gB"]:
        for q in ["0", "1A", "1B", "D"]:
            t[(q, m)] = ("D", f"{m}x")
        for s in ["A", "B"]:
            t[(f"2{s}", m)] = ("D", f"{m}ok" if m[1] == s else f"{m}x")
    for s in ["A", "B"]:
        t[("0", f"s{s}")] = (f"1{s}", "⊥")
        for m in ["sA", "sB"]:
            t[(f"1{s}", m)] = (f"2{s}", "sync" if link else "⊥")
            t[(f"2{s}", m)] = (f"2{s}", "⊥")
    for m in ["sA", "sB"]:
        t[("D", m)] = ("D", "⊥")
    p0 = machine(["0", "1A", "1B", "2A", "2B", "D"], "0", t)
    p1 = memoryless(moves, lambda m: m)
    c = {}
    for m in moves:
        c[("W", m)] = ("W", "win")
        c[("L", m)] = ("L", "lose")
    for s in ["A", "B"]:
        c[("r1", f"s{s}")] = (f"r2{s}", "n")
        for m in ["sA", "sB"]:
            c[(f"r2{s}", m)] = (f"r3{s}", "n")
            c[(f"r3{s}", m)] = (f"r3{s}", "n")
        for g in ["gA", "gB"]:
            c[(f"r2{s}", g)] = ("L", "lose")
            c[(f"r3{s}", g)] = ("W", "win") if g[1] == s else ("L", "lose")
    for g in ["gA", "gB"]:
        c[("r1", g)] = ("L", "lose")
    coloring = machine(["r1", "r2A", "r2B", "r3A", "r3B", "W", "L"], "r1", c)
    return game(
        2,
        ["w", "gA", "gB"],
        moves,
        act,
        ["⊥", "sync", "gAok", "gAx", "gBok", "gBx", "sA", "sB", "gA", "gB"],
        [p0, p1],
        {"sync": [[0, 1]]} if link else {},
        ["n", "win", "lose"],
        coloring,
        {"kind": "reachability", "targets": ["win"]},
    )


def chain():
    moves = ["a", "b", "e", "c", "d"]
    p0 = memoryless(moves, lambda m: m if m in "cd" else "⊥")
    p1 = memoryless(moves, lambda m: {"a": "x", "b": "y", "e": "y"}.get(m, m))
    p2 = memoryless(moves, lambda m: {"a": "u", "b": "u", "e": "v"}.get(m, m))
    t = {}
    for q in ["even", "odd"]:
        t[(q, "a")] = ("odd" if q == "even" else "even", "n")
        for m in ["b", "e", "d"]:
            t[(q, m)] = (q, "n")
        t[(q, "c")] = (q, q)
    return game(
        3,
        ["go", "stop"],
        moves,
        {"a": "go", "b": "go", "e": "go", "c": "stop", "d": "stop"},
        ["⊥", "c", "d", "x", "y", "u", "v"],
        [p0, p1, p2],
        {"c": [[0, 1], [1, 2]], "d": [[0, 2]], "v": [[2, 1]]},
        ["n", "even", "odd"],
        machine(["even", "odd"], "even", t),
        {"kind": "parity", "convention": "min-even", "priorities": {"n": 1, "even": 0, "odd": 1}},
    )


def hier4():
    """Three observers, one per #-separated block; # does not separate
    blocks after the second one."""
    moves = ["a", "b", "c", "#"]
    t = {}
    states = []
    for k in [1, 2, 3]:
        for rev in [False, True]:
            q = f"b{k}{'r' if rev else ''}"
            states.append(q)
            for m in moves:
                if m == "#" and k < 3:
                    t[(q, m)] = (f"b{k + 1}", "⊥")
                elif rev:
                    t[(q, m)] = (q, f"c{k}")
                elif m == "c":
                    t[(q, m)] = (f"b{k}r", f"c{k}")
                else:
                    t[(q, m)] = (q, "⊥")
    p0 = machine(states, "b1", t)
    observers = [p0]
    for k in [1, 2, 3]:
        o = {}
        for blk in [1, 2, 3]:
            for m in moves:
                nxt = f"k{blk + 1}" if m == "#" and blk < 3 else f"k{blk}"
                if blk != k:
                    out = "⊥"
                elif m == "#":
                    out = "#" if k == 3 else "⊥"
                else:
                    out = m
                o[(f"k{blk}", m)] = (nxt, out)
        observers.append(machine(["k1", "k2", "k3"], "k1", o))
    return game(
        4,
        ["go"],
        moves,
        {m: "go" for m in moves},
        ["⊥", "a", "b", "c", "#", "c1", "c2", "c3"],
        observers,
        {"c1": [[0, 1]], "c2": [[0, 2]], "c3": [[0, 3]]},
        ["n", "hit"],
        memoryless(moves, lambda m: "hit" if m == "c" else "n"),
        {"kind": "reachability", "targets": ["hit"]},
    )


def two_tape(moves, states, initial, accepting, edges, sink=None, act=None):
    delta = {}
    for (q, pairs, t) in edges:
        for p in pairs:
            key = f"{q},{p}"
            assert key not in delta, key
            delta[key] = t
    doc = {
        "schema_version": 1,
        "moves": moves,
        "states": states,
        "initial": initial,
        "accepting": accepting,
        "delta": delta,
    }
    if sink:
        doc["sink"] = sink
    if act:
        doc["act"] = act
    return doc


def pairs(s):
    return [p.replace(",", "|") for p in s.split()]


def fig5c():
    # the figure leaves q4's loops on {a,b}² implicit; they are completed here
    return two_tape(
        ["a", "b", "c"],
        ["q3", "q4", "x"],
        "q3",
        ["q3", "q4"],
        [
            ("q3", pairs("a,a b,b c,c"), "q3"),
            ("q3", pairs("a,b b,a"), "q4"),
            ("q4", pairs("a,a a,b b,a b,b"), "q4"),
        ],
        sink="x",
        act={"a": "x", "b": "x", "c": "y"},
    )


DIVERGE = "a,b b,a a,# #,a b,# #,b"


def fig8():
    g = ["a", "b", "c", "#"]
    neq = " ".join(f"{x},{y}" for x in g for y in g if x != y)
    return two_tape(
        g,
        ["q1", "q2", "q3", "rej"],
        "q1",
        ["q1", "q2", "q3"],
        [
            ("q1", pairs("a,a b,b #,#"), "q1"),
            ("q1", pairs("c,c"), "q2"),
            ("q1", pairs(DIVERGE), "q3"),
            ("q1", pairs("a,c b,c #,c c,a c,b c,#"), "rej"),
            ("q2", pairs("a,a b,b c,c"), "q2"),
            ("q2", pairs("#,#"), "q1"),
            ("q2", pairs(neq), "rej"),
            ("q3", pairs("a,a b,b " + DIVERGE), "q3"),
            ("q3", pairs("#,#"), "q1"),
            ("q3", pairs("c,a c,b c,c c,# a,c b,c #,c"), "rej"),
            ("rej", [f"{x}|{y}" for x in g for y in g], "rej"),
        ],
    )


def fig9():
    div = DIVERGE
    edges = []
    for lvl, nxt in [("q", "p1"), ("p", "r1")]:
        edges += [
            (f"{lvl}1", pairs("a,a b,b"), f"{lvl}1"),
            (f"{lvl}1", pairs("#,#"), nxt),
            (f"{lvl}1", pairs("c,c"), f"{lvl}2"),
            (f"{lvl}1", pairs(div), f"{lvl}3"),
            (f"{lvl}2", pairs("a,a b,b c,c"), f"{lvl}2"),
            (f"{lvl}2", pairs("#,#"), nxt),
            (f"{lvl}3", pairs("a,a b,b " + div), f"{lvl}3"),
            (f"{lvl}3", pairs("#,#"), nxt),
        ]
    edges += [
        ("r1", pairs("a,a b,b #,#"), "r1"),
        ("r1", pairs("c,c"), "r2"),
        ("r1", pairs(DIVERGE), "r3"),
        ("r2", pairs("a,a b,b c,c #,#"), "r2"),
        ("r3", pairs("a,a b,b #,# " + DIVERGE), "r3"),
    ]
    states = ["q1", "q2", "q3", "p1", "p2", "p3", "r1", "r2", "r3", "sink"]
    return two_tape(["a", "b", "c", "#"], states, "q1", states[:-1], edges, sink="sink")


def main():
    os.makedirs(OUT, exist_ok=True)
    docs = {
        "peek.json": peek(),
        "sync-reach.json": sync_reach(True),
        "nosync-reach.json": sync_reach(False),
        "chain.json": chain(),
        "hier4-fip.json": hier4(),
        "fig5c.json": fig5c(),
        "fig8.json": fig8(),
        "fig9.json": fig9(),
    }
    for name, doc in docs.items():
        with open(os.path.join(OUT, name), "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2, ensure_ascii=False, sort_keys=False)
            f.write("\n")


if __name__ == "__main__":
    main()
