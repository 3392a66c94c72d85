"""
Reference imputers
==================

Column mean, k-nearest neighbours (partial distance over shared columns),
iterative truncated SVD and chained ridge regressions, on a matrix with
clear linear structure and on a low-rank one.
"""
from fsimpute import AmputationConfig, BaselineConfig, RngStream, ampute, rmse
from fsimpute.baselines import impute_knn, impute_mean, impute_mice, impute_svd
from fsimpute.synthetic import linear_blend, low_rank

cases = {
    "linear blend": (linear_blend(1000, 8, 0.05, seed=1), BaselineConfig()),
    "rank 2": (low_rank(200, 20, 2, seed=1), BaselineConfig(svd_rank=2, svd_max_iters=500, svd_tol=1e-8)),
}
for name, (x, cfg) in cases.items():
    amp = ampute(x, AmputationConfig("MCAR", 0.2, RngStream(5)))
    print(name)
    for label, fn in (("mean", impute_mean), ("knn", impute_knn), ("svd", impute_svd), ("mice", impute_mice)):
        out = fn(amp.x_hat, amp.mask) if fn is impute_mean else fn(amp.x_hat, amp.mask, cfg)
        print(f"   {label:5s} RMSE {rmse(x, out, amp.mask):.4f}")
