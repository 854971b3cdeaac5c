"""Enumeration of one-free-strand classes for the property sweeps."""

import itertools
from fractions import Fraction

from braidforce import braid_core as bc
from braidforce import colored_classes as cc


def skeleton_classes(m: int, d: int):
    """One order-type representative per skeleton class."""
    seen = set()
    for s in bc.all_states(m, d):
        if s in seen:
            continue
        comp = bc.state_component(s, m)
        seen |= comp
        yield min(comp)


def proper_bounded_classes(max_m: int = 3, max_d: int = 4):
    """Colored braids a rel b with one red strand whose class is proper and bounded."""
    for m in range(1, max_m + 1):
        for d in range(1, max_d + 1):
            for s in skeleton_classes(m, d):
                b = bc.state_braid(s, m)
                black = [st.anchors for st in b.strands]
                if b.perm is None:
                    continue
                done = set()
                for gaps in itertools.product(range(m + 1), repeat=d):
                    if gaps in done:
                        continue
                    red = [Fraction(2 * g + 1) for g in gaps] + [Fraction(2 * gaps[0] + 1)]
                    ab = cc.ColoredDiscretizedBraid.from_parts([red], black)
                    lat, g0 = cc.lattice_of(ab, False)
                    comp = cc.component(lat, g0)
                    done |= comp
                    if any(x in (0, lat.M) for c in comp for x in c):
                        continue
                    if cc._collapse_witness(lat, comp) is not None:
                        continue
                    yield ab
