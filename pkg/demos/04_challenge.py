"""The verifier/prover challenge with three provers.

The verifier keeps the concept key. Provers see labeled S and unlabeled T
and must label more than 99% of T correctly to be accepted.
"""

from svmqke import FeatureConfig, GroupParams, NoisePolicy
from svmqke.challenge import make_challenge, prover_classical, prover_dlog, prover_svmqke, verify
from svmqke.feature_kernel import k_for_sample_size

params = GroupParams(1048573, 2)
cfg = FeatureConfig(k_for_sample_size(params.n, 200), params)

for seed in range(3):
    ch = make_challenge(params, 200, 1000, seed)
    answers = {
        "svm-qke": prover_svmqke(ch.S, ch.T, cfg, NoisePolicy.exact()),
        "dlog clusters": prover_dlog(ch.S, ch.T, params),
        "rbf on bits": prover_classical(ch.S, ch.T, params, "rbf"),
    }
    print(f"challenge {seed}:")
    for name, labels in answers.items():
        v = verify(labels, ch)
        print(f"  {name:<14} {v.correct:>4}/{v.total}  {'accept' if v.accepted else 'reject'}")
