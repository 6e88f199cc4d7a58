"""Adding a connection that is a function of existing ones can make a
noncontextual system contextual.

Run:  python3 demos/redundant_connection.py
"""
from cbdkit import (add_connection, cnt1, is_consistently_connected, is_contextual,
                    paper_example, parse_function, subsystem)
from cbdkit.coupling import coupling_unique

# three fair +-1 variables X, Y, Z, each perfectly correlated across its two contexts
base = paper_example("eq6")
print("base contextual:", is_contextual(base))                      # False
print("base consistently connected:", bool(is_consistently_connected(base)))

# an indicator connection q4: 1 in c1, -1 in c3, empty in c2
indicated = paper_example("eq8")
print("with indicator contextual:", is_contextual(indicated))       # still False
print("with indicator consistently connected:", bool(is_consistently_connected(indicated)))

u = coupling_unique(indicated)
print("multimaximal coupling unique:", u.unique)
for row in u.coupling.to_list():
    print("   ", row)

# q0 reads R1 where the indicator says 1, -R1 where it says -1
f = parse_function("R1 if R4 = 1; -R1 if R4 = -1; NOMEAS otherwise")
print("f =", f)
derived = add_connection(indicated, "q0", f)
print("derived contextual:", is_contextual(derived))                # True
print("derived cnt1:", cnt1(derived))

# dropping q1 and q4 leaves a rank-3 PR box
pr = subsystem(derived, ["q0", "q2", "q3"]).permuted(["q0", "q2", "q3"])
print("PR box equals catalog entry:", pr == paper_example("eq11-pr3"))
print("PR box cnt1:", cnt1(pr))
