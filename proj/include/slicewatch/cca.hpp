#pragma once

#include <utility>
#include <vector>

#include "slicewatch/types.hpp"

namespace slicewatch {

inline constexpr double kEigFloor = 1e-8;

// Streaming first and second moments of one virtual link's (u, y) pair
// stream. Stores centered scatter matrices; covariance = scatter/(count-1).
class CovarianceTracker {
public:
    CovarianceTracker() = default;

    // Batch initialization from t0 >= 2 rows per side.
    CovarianceTracker(const Mat& u_batch, const Mat& y_batch);

    // Rank-one absorb of a new pair, per the incremental mean/scatter
    // recursion; equivalent to recomputing from the full history.
    void update(const Vec& u, const Vec& y);

    long count() const { return count_; }
    int dim_u() const { return static_cast<int>(mean_u_.size()); }
    int dim_y() const { return static_cast<int>(mean_y_.size()); }
    const Vec& mean_u() const { return mean_u_; }
    const Vec& mean_y() const { return mean_y_; }
    const Mat& scatter_uu() const { return scatter_uu_; }
    const Mat& scatter_yy() const { return scatter_yy_; }
    const Mat& scatter_uy() const { return scatter_uy_; }
    Mat cov_uu() const { return scatter_uu_ / (count_ - 1.0); }
    Mat cov_yy() const { return scatter_yy_ / (count_ - 1.0); }
    Mat cov_uy() const { return scatter_uy_ / (count_ - 1.0); }

    // Exact (bitwise) state equality; used by rollback checks.
    bool exactly_equals(const CovarianceTracker& other) const;

private:
    long count_ = 0;
    Vec mean_u_, mean_y_;
    Mat scatter_uu_, scatter_yy_, scatter_uy_;
};

// Inverse square root of a symmetric PSD matrix via eigendecomposition;
// eigenvalues are floored at `floor_eps` before the power.
Mat inv_sqrt_psd(const Mat& m, double floor_eps);

// Canonical correlation model for one virtual link.
struct CcaModel {
    Mat J;       // p x kappa
    Mat L;       // d x kappa
    Vec sigma;   // kappa canonical correlations, non-increasing, in [0, 1]
    Vec mean_u;  // centering vectors frozen at fit time
    Vec mean_y;
    int kappa = 0;
};

// Whitened cross-covariance SVD: K = Su^-1/2 Suy Sy^-1/2 = R Sigma V^T,
// J = Su^-1/2 R, L = Sy^-1/2 V, truncated to kappa = min(p, d) directions.
CcaModel fit_cca(const CovarianceTracker& tracker, double floor_eps = kEigFloor);

// r = J^T (u - mean_u) - diag(sigma) L^T (y - mean_y)
Vec residual(const CcaModel& model, const Vec& u, const Vec& y);

// T^2 = r^T Sigma_r^-1 r with Sigma_r = I - diag(sigma)^2, floored entrywise.
double t2_score(const CcaModel& model, const Vec& r, double floor_eps = kEigFloor);

struct PlVerdict {
    long time = 0;
    std::vector<double> per_vl_scores;
    double threshold = 0.0;
    bool is_anomalous = false;
    bool committed = false;
};

// Detector for one physical link, monitoring every virtual link mapped onto
// it. Provisional tracker updates are committed only when all T^2 scores stay
// under the control limit; otherwise state reverts to the last committed one.
class PlDetector {
public:
    PlDetector(std::vector<CovarianceTracker> initial, double threshold,
               double floor_eps = kEigFloor, bool rollback = true);

    PlVerdict step(const std::vector<std::pair<Vec, Vec>>& pairs);

    void set_threshold(double threshold) { threshold_ = threshold; }
    double threshold() const { return threshold_; }
    bool rollback_enabled() const { return rollback_; }
    std::size_t num_vls() const { return trackers_.size(); }
    const std::vector<CovarianceTracker>& trackers() const { return trackers_; }
    const std::vector<CcaModel>& models() const { return models_; }
    long time() const { return time_; }

private:
    std::vector<CovarianceTracker> trackers_;
    std::vector<CcaModel> models_;
    double threshold_;
    double floor_eps_;
    bool rollback_;
    long time_ = 0;
};

}  // namespace slicewatch
