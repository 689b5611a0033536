"""Discrete logs and the halfspace concept class on a small group.

Run with ``python3 demos/01_groups_and_concepts.py``.
"""

import numpy as np

from svmqke import Concept, GroupParams, discrete_log, generate_dataset, label, random_group

params = GroupParams(23, 5)
print(f"group Z_{params.p}^*, generator {params.g}, order {params.order}")

# Powers of g walk through every residue exactly once.
print("g^e mod p for e = 0..21:", [pow(params.g, e, params.p) for e in range(params.order)])
print("log_5(21) =", discrete_log(21, params))

# A concept labels x by whether log x falls in the half-circle starting at s.
concept = Concept(1, params)
row = {x: label(x, concept) for x in range(1, params.p)}
print("labels for s=1:", row)
print("class balance:", sum(row.values()))

# Bigger groups come from a seeded prime search.
big = random_group(32, seed=4)
print(f"\nrandom 32-bit group: p={big.p}, g={big.g}")
samples = generate_dataset(Concept(12345, big), 5, np.random.default_rng(0))
for s in samples:
    print(f"  x={s.x:>10}  log={discrete_log(s.x, big):>10}  y={s.y:+d}")
