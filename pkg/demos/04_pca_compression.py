"""
Dimension reduction: delta descriptors survive PCA, raw ones suffer
===================================================================

Retrieval cost grows with descriptor dimension, so projections like PCA are
standard practice. Under appearance change the variance structure of raw
descriptors is not repeatable across traverses, and their performance drops
after projection. Delta descriptors live in a change space that is shared
between traverses, so they keep almost all of their performance even when
only a small fraction of components is retained.
"""

from dataclasses import replace

from deltadesc import (
    DeltaConfig,
    SynthParams,
    delta,
    distance_matrix,
    evaluate_pr,
    generate_traverse_pair,
    max_f1,
    pca_fit,
    pca_transform,
    retrieve_best,
)

params = SynthParams(
    frames=800, dims=128, latent_smooth_window=15,
    offset_scale=0.5, noise_scale=0.1, seed=10,
)
ref, query, gt = generate_traverse_pair(params)
gt = replace(gt, radius=2.0)

cfg = DeltaConfig(window=12)
dq, dr = delta(query, cfg), delta(ref, cfg)


def f1(q_series, r_series):
    return max_f1(evaluate_pr(retrieve_best(distance_matrix(q_series, r_series)), gt))


print(f"{'k':>6s}  {'raw F1':>8s}  {'delta F1':>8s}")
print(f"{'full':>6s}  {f1(query, ref):8.3f}  {f1(dq, dr):8.3f}")

# Fit PCA on the reference traverse only (queries arrive later in deployment)
# and apply the same model to both sides.
for k in (100, 50, 20, 10):
    raw_model = pca_fit(ref, k)
    delta_model = pca_fit(dr, k)
    raw_k = f1(pca_transform(raw_model, query), pca_transform(raw_model, ref))
    delta_k = f1(pca_transform(delta_model, dq), pca_transform(delta_model, dr))
    print(f"{k:6d}  {raw_k:8.3f}  {delta_k:8.3f}")

print("\ndelta retains its F1 down to a handful of components;")
print("raw matching, already hurt by the offsets, degrades further.")
