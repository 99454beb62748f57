"""Expected mean agreement of the synthetic annotator simulation, by enumeration.

n is uniform over {1, 3, 5}; each annotator flips the true label with
probability q; agreement is the majority's share of the n votes.
"""
from math import comb

def expected_agreement(q: float) -> float:
    total = 0.0
    for n in (1, 3, 5):
        e = 0.0
        for flips in range(n + 1):
            p = comb(n, flips) * q**flips * (1 - q) ** (n - flips)
            e += p * max(flips, n - flips) / n
        total += e / 3
    return total

print("flip 0.2:", repr(expected_agreement(0.2)))
print("flip 0.0:", repr(expected_agreement(0.0)))
