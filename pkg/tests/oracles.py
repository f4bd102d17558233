"""Independent reference implementations used only by the tests.

None of these import the package's algorithms; they recompute the expected
answers by the most direct method available.
"""
from __future__ import annotations

from itertools import product


def merge_closure_classes(apex, X, Y, f, g):
    """Pushout classes by repeated pairwise merging until nothing changes.

    ``f`` and ``g`` are dicts (possibly partial).  Unmapped apex elements get
    a fresh sentinel on that side, so the apex element still forms a class.
    Returns a set of frozensets of member labels (X, Y and apex labels).
    """
    blocks = [{("X", x)} for x in X] + [{("Y", y)} for y in Y]
    links = []
    for a in apex:
        fa = ("X", f[a]) if a in f else ("fresh_x", a)
        ga = ("Y", g[a]) if a in g else ("fresh_y", a)
        for node in (fa, ga):
            if not any(node in b for b in blocks):
                blocks.append({node})
        links.append((fa, ga, a))
    changed = True
    while changed:
        changed = False
        for fa, ga, _ in links:
            bi = next(i for i, b in enumerate(blocks) if fa in b)
            bj = next(i for i, b in enumerate(blocks) if ga in b)
            if bi != bj:
                blocks[bi] |= blocks[bj]
                del blocks[bj]
                changed = True
                break
    out = set()
    for b in blocks:
        labels = {lab for side, lab in b if side in ("X", "Y")}
        labels |= {a for fa, ga, a in links if fa in b}
        out.add(frozenset(labels))
    return out


def all_functions(dom, cod):
    """Every function dom -> cod as a dict."""
    dom = list(dom)
    for images in product(list(cod), repeat=len(dom)):
        yield dict(zip(dom, images))


def law_violations(objects, morphisms, identities, table):
    """Brute-force identity/unitality/associativity check.

    ``morphisms`` maps name -> (source, target); ``table[(f, g)]`` is g after f.
    Returns the set of violation keys ``(law, subject)``.
    """
    bad = set()
    for x in objects:
        i = identities.get(x)
        if i is None or morphisms.get(i) != (x, x):
            bad.add(("identity", x))
    for (f, g), h in table.items():
        if h not in morphisms or morphisms[h] != (morphisms[f][0], morphisms[g][1]):
            bad.add(("typing", f"{f},{g}"))
    for m, (s, t) in morphisms.items():
        if table.get((identities.get(s), m)) != m:
            bad.add(("unit", m))
        if table.get((m, identities.get(t))) != m:
            bad.add(("unit", m))
    for f, g, h in product(morphisms, repeat=3):
        if morphisms[f][1] != morphisms[g][0] or morphisms[g][1] != morphisms[h][0]:
            continue
        fg, gh = table.get((f, g)), table.get((g, h))
        left = table.get((fg, h)) if fg is not None else None
        right = table.get((f, gh)) if gh is not None else None
        if left is None or left != right:
            bad.add(("assoc", f"{f},{g},{h}"))
    return bad


def paths_in_dag(edges, start):
    """All nonempty paths from ``start`` as tuples of edge names; edges are (name, src, tgt)."""
    out = []

    def walk(node, trail):
        for name, s, t in edges:
            if s == node:
                out.append(trail + (name,))
                walk(t, trail + (name,))

    walk(start, ())
    return out
