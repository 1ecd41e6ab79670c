"""Check the regret guarantees on a single simulated stream.

Three studies run on a small VAR(2) process with unit innovations:

* TIRSO with the diminishing step 1/(beta~ t): the static regret is
  compared with the explicit logarithmic bound built from measured
  constants;
* TISO and TIRSO with the doubling trick: R_s[T] / sqrt(T) at the window
  boundaries should stop growing;
* TIRSO with a constant step on a slowly drifting process: the tracking
  error against the instantaneous minimizers should settle below
  sigma / (alpha beta~).

Run with ``python demos/regret_certificates.py``.
"""

import numpy as np

from onlinetopo.certify import doubling_regret_study, log_regret_study, tracking_study
from onlinetopo.model import (
    generate_er_graph,
    sample_var_coefficients,
    simulate_drifting_var,
    simulate_var,
)

N, P = 5, 2
params = sample_var_coefficients(generate_er_graph(N, 0.3, seed=0), P, seed=100)
y = simulate_var(params, 2049, 1.0, seed=200).samples

st = log_regret_study(y, P, 0.99, 1.0)
cert = st.certificate
print(f"B_y={cert.b_y:.2f}  L={cert.l_max:.2f}  beta~={cert.beta_tilde:.3f}"
      f"  kappa={cert.kappa_phi:.1f}")
print(f"log-regret bound: regret per node {np.round(st.report.static_regret, 1)}"
      f" vs bound {st.checks[0].bound:.3g} -> {'PASS' if st.passed else 'FAIL'}")

for alg in ("TISO", "TIRSO"):
    st = doubling_regret_study(y, alg, P, 64)
    ratio = st.report.boundary_regret[:, 0] / np.sqrt(st.report.boundaries)
    print(f"{alg} doubling: R_s/sqrt(T) at {st.report.boundaries.tolist()} = {np.round(ratio, 2)}"
          f" -> {'PASS' if st.passed else 'FAIL'}")

ts, _ = simulate_drifting_var(params, 1500, 0.002, 1.0, seed=300)
st = tracking_study(ts.samples, P, 0.99, 1.0, 0.01)
for c in st.checks:
    name = {0: "static <= dynamic", 5: "dynamic regret bound", 6: "tracking error"}[c.theorem]
    print(f"drift, {name}: {'PASS' if c.passed else 'FAIL'}")
