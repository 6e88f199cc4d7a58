"""Consistification: every system has a strongly consistently connected
twin with the same contextuality status and contextual fraction.

Run:  python3 demos/consistification.py
"""
from cbdkit import (consistify, contextual_fraction, is_consistently_connected,
                    is_contextual, is_strongly_consistently_connected, random_cyclic_system)
from cbdkit.testkit import system_a

# a cyclic rank-3 system with one partially anticorrelated context
a = system_a(both_one=["1/2", "1/2", "1/4"])
b, naming = consistify(a)
print("A contexts:", list(a.contexts))
print("B contexts:", list(b.contexts))
print("B contents:", list(b.contents))
print("B strongly consistent:", bool(is_strongly_consistently_connected(b)))
print("contextual:", is_contextual(a), is_contextual(b))
print("contextual fraction:", contextual_fraction(a), contextual_fraction(b))

# an inserted context is a maximal coupling of two copies of one cell
k = naming.pairs[("q1", "c1", "c3")]
print(k, dict(b.bunch(k).pmf))

# same check over a batch of random systems, consistent or not
agree = 0
for seed in range(40):
    s = random_cyclic_system(3, consistent=seed % 2 == 0, seed=seed)
    t, _ = consistify(s)
    same = is_contextual(s) == is_contextual(t)
    if is_consistently_connected(s):
        same = same and contextual_fraction(s) == contextual_fraction(t)
    agree += same
print(f"{agree}/40 random systems agree")

for entry in naming.to_dict()["pairs"]:
    print(entry)
