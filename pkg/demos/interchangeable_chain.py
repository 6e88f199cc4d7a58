"""Swapping a connection for an informationally interchangeable one,
with every system along the way strongly consistently connected.

Run:  python3 demos/interchangeable_chain.py
"""
from cbdkit import (add_connection, is_contextual, is_strongly_consistently_connected,
                    paper_example, remove_connection, verify_function)

chain = [paper_example(f"chain-{k}") for k in (1, 2, 3)]
for k, s in enumerate(chain, 1):
    print(f"step {k}: contents={list(s.contents)}",
          "contextual" if is_contextual(s) else "noncontextual",
          "| strongly consistent:", bool(is_strongly_consistently_connected(s)))

g = paper_example("eq25-g")   # q0 from q1 and the two indicators
h = paper_example("eq26-h")   # q1 from q0 and the two indicators
print("g:", g)
print("h:", h)

# both directions hold on the system carrying q0 and q1 side by side
both = add_connection(chain[1], "q0", g)
print("q0 = g(...):", verify_function(both, "q0", g))
print("q1 = h(...):", verify_function(both, "q1", h))

# going forward with g and back with h lands on the neighbouring steps
forward = remove_connection(both, "q1").permuted(chain[2].contents)
print("forward reaches step 3:", forward == chain[2])
back = remove_connection(add_connection(chain[2], "q1", h), "q0").permuted(chain[1].contents)
print("backward reaches step 2:", back == chain[1])
