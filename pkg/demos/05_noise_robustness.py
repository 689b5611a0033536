"""How far shot noise moves the decision function, as R grows.

For each seed the same training and test sets feed an exact and a noisy
classifier; the reported number is the largest |h(x) - h'(x)| over the tests.
"""

import numpy as np

from svmqke import Concept, FeatureConfig, GroupParams
from svmqke.diagnostics import noise_robustness_experiment
from svmqke.feature_kernel import k_for_sample_size

params = GroupParams(65521, 17)
m = 50
cfg = FeatureConfig(k_for_sample_size(params.n, m), params)
concept = Concept(12345, params)

print(" R          median max|h-h'|   worst")
for R in (m**2, m**3, m**4):
    devs = noise_robustness_experiment(concept, m, R, cfg, seeds=range(20), m_test=500)
    print(f" {R:<10} {np.median(devs):>14.2e}   {max(devs):.2e}")
