import numpy as np

from qsvmbench import (
    CircuitConfig,
    effective_rank,
    fit,
    linear_kernel,
    make_synthetic,
    normalize,
    quantum_kernel,
    spectrum,
    split,
    transform,
)

# A linear kernel on q PCA components can never have rank above q, however
# many training samples there are. The fidelity kernel on the same features
# has no such ceiling.
ds = make_synthetic(n=200, d=32, seed=0)
sp = split(ds, seed=0)

for q in (4, 6):
    pipe = fit(ds, sp.train, q)
    x = transform(pipe, ds.features[sp.train])
    lin = spectrum(linear_kernel(x))
    kq = normalize(quantum_kernel(x, cfg=CircuitConfig(q)), "trace")
    qs = spectrum(kq)
    print(f"q={q}: linear has {lin.n_positive} positive eigenvalues (eff_rank {lin.eff_rank:.2f}), "
          f"quantum has {qs.n_positive} (eff_rank {qs.eff_rank:.2f})")

# Trace normalization rescales every eigenvalue by the same factor, so the
# effective rank does not move
raw = quantum_kernel(x, cfg=CircuitConfig(6))
print("eff_rank raw vs trace:", effective_rank(raw), effective_rank(normalize(raw, "trace")))
print("trace after normalization:", np.trace(normalize(raw, "trace").values))
