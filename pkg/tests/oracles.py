"""Independent reference computations used by the tests.

Nothing here imports the analyzer: state spaces come from filtering the
powerset, and scenario distributions from their closed forms.
"""

from fractions import Fraction
from itertools import combinations


def independent_sets(n, edges):
    """All independent sets as frozensets of node indices, by powerset filtering."""
    edge_set = {frozenset(e) for e in edges}
    out = []
    for size in range(n + 1):
        for subset in combinations(range(n), size):
            if not any(frozenset(p) in edge_set for p in combinations(subset, 2)):
                out.append(frozenset(subset))
    return out


def product_form_bruteforce(n, edges, theta):
    sets = independent_sets(n, edges)
    weights = {}
    for s in sets:
        w = 1.0
        for i in s:
            w *= theta[i]
        weights[s] = w
    phi = sum(weights.values())
    return {s: w / phi for s, w in weights.items()}, phi


def vehicular_pos1(t):
    """Closed form with common theta; keys are state labels."""
    d = 1 + 3 * t + t * t
    return {"-": 1 / d, "A": t / d, "B": t / d, "D": t / d, "BD": t * t / d}


def vehicular_pos2(t):
    d = 1 + 3 * t
    return {"-": 1 / d, "A": t / d, "B": t / d, "D": t / d}


def plc(ta, tb, tc, td, te):
    d = 1 + ta + tb + tc + td + te + ta * td + ta * te + tb * te
    return {
        "-": 1 / d, "A": ta / d, "B": tb / d, "C": tc / d, "D": td / d, "E": te / d,
        "AD": ta * td / d, "AE": ta * te / d, "BE": tb * te / d,
    }


def bonding(ta, tb, tc, td, te):
    phi = (1 + ta + tb + tc + td + te + ta * tb + ta * tc + tb * tc + tb * td + tc * td
           + ta * tb * tc + tb * tc * td)
    pi = {
        "-": 1, "A": ta, "B": tb, "C": tc, "D": td, "E": te,
        "AB": ta * tb, "AC": ta * tc, "BC": tb * tc, "BD": tb * td, "CD": tc * td,
        "ABC": ta * tb * tc, "BCD": tb * tc * td,
    }
    return {k: v / phi for k, v in pi.items()}, phi


def bonding_throughput(el, et, eb):
    """Per-WLAN throughput (bits/s) from the bonding closed forms, in exact arithmetic."""
    el, et, eb = Fraction(el), Fraction(et), Fraction(eb)
    lam = 1 / eb
    theta = [lam * et, lam * et, lam * et / 2, lam * et / 4, lam * et / 8]
    pi, phi = bonding(*theta)
    x = {
        "A": (pi["A"] + pi["AB"] + pi["AC"] + pi["ABC"]) * el / et,
        "B": (pi["B"] + pi["AB"] + pi["BC"] + pi["BD"] + pi["ABC"] + pi["BCD"]) * el / et,
        "C": (pi["C"] + pi["AC"] + pi["BC"] + pi["CD"] + pi["ABC"] + pi["BCD"]) * el / (et / 2),
        "D": (pi["D"] + pi["BD"] + pi["CD"] + pi["BCD"]) * el / (et / 4),
        "E": pi["E"] * el / (et / 8),
    }
    return x, phi


PLC_PAIRS = [("A", "B"), ("A", "C"), ("B", "C"), ("B", "D"), ("C", "D"), ("C", "E"), ("D", "E")]
