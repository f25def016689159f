#include "slicewatch/cca.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

namespace slicewatch {

CovarianceTracker::CovarianceTracker(const Mat& u_batch, const Mat& y_batch) {
    if (u_batch.rows() != y_batch.rows()) {
        throw DimensionError("CovarianceTracker: u and y batches disagree on sample count");
    }
    if (u_batch.rows() < 2) {
        throw ConfigError("CovarianceTracker: need at least 2 initial samples, got " +
                          std::to_string(u_batch.rows()));
    }
    count_ = u_batch.rows();
    mean_u_ = u_batch.colwise().mean();
    mean_y_ = y_batch.colwise().mean();
    const Mat cu = u_batch.rowwise() - mean_u_.transpose();
    const Mat cy = y_batch.rowwise() - mean_y_.transpose();
    scatter_uu_ = cu.transpose() * cu;
    scatter_yy_ = cy.transpose() * cy;
    scatter_uy_ = cu.transpose() * cy;
}

void CovarianceTracker::update(const Vec& u, const Vec& y) {
    if (u.size() != mean_u_.size() || y.size() != mean_y_.size()) {
        throw DimensionError("CovarianceTracker::update: sample dimensions do not match tracker");
    }
    const double t = static_cast<double>(count_);
    const Vec du = mean_u_ - u;  // c(t) - u_{t+1}
    const Vec dy = mean_y_ - y;
    const double w = t / (t + 1.0);
    scatter_uu_ += w * du * du.transpose();
    scatter_yy_ += w * dy * dy.transpose();
    scatter_uy_ += w * du * dy.transpose();
    mean_u_ = (t * mean_u_ + u) / (t + 1.0);
    mean_y_ = (t * mean_y_ + y) / (t + 1.0);
    ++count_;
}

bool CovarianceTracker::exactly_equals(const CovarianceTracker& other) const {
    return count_ == other.count_ && mean_u_ == other.mean_u_ && mean_y_ == other.mean_y_ &&
           scatter_uu_ == other.scatter_uu_ && scatter_yy_ == other.scatter_yy_ &&
           scatter_uy_ == other.scatter_uy_;
}

Mat inv_sqrt_psd(const Mat& m, double floor_eps) {
    if (m.rows() != m.cols()) {
        throw DimensionError("inv_sqrt_psd: matrix must be square");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw DimensionError("inv_sqrt_psd: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()));
    Vec inv_sqrt = eig.eigenvalues().cwiseMax(floor_eps).cwiseSqrt().cwiseInverse();
    return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
}

CcaModel fit_cca(const CovarianceTracker& tracker, double floor_eps) {
    if (tracker.count() < 2) {
        throw ConfigError("fit_cca: tracker holds fewer than 2 samples");
    }
    const Mat su_inv_sqrt = inv_sqrt_psd(tracker.cov_uu(), floor_eps);
    const Mat sy_inv_sqrt = inv_sqrt_psd(tracker.cov_yy(), floor_eps);
    const Mat k = su_inv_sqrt * tracker.cov_uy() * sy_inv_sqrt;

    Eigen::JacobiSVD<Mat> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int kappa = static_cast<int>(std::min(k.rows(), k.cols()));

    CcaModel model;
    model.kappa = kappa;
    model.J = su_inv_sqrt * svd.matrixU().leftCols(kappa);
    model.L = sy_inv_sqrt * svd.matrixV().leftCols(kappa);
    model.sigma = svd.singularValues().head(kappa).cwiseMin(1.0).cwiseMax(0.0);
    model.mean_u = tracker.mean_u();
    model.mean_y = tracker.mean_y();
    return model;
}

Vec residual(const CcaModel& model, const Vec& u, const Vec& y) {
    if (u.size() != model.mean_u.size() || y.size() != model.mean_y.size()) {
        throw DimensionError("residual: sample dimensions do not match model");
    }
    return model.J.transpose() * (u - model.mean_u) -
           model.sigma.asDiagonal() * (model.L.transpose() * (y - model.mean_y));
}

double t2_score(const CcaModel& model, const Vec& r, double floor_eps) {
    if (r.size() != model.kappa) {
        throw DimensionError("t2_score: residual length does not match retained rank");
    }
    double score = 0.0;
    for (int i = 0; i < model.kappa; ++i) {
        const double var = std::max(1.0 - model.sigma(i) * model.sigma(i), floor_eps);
        score += r(i) * r(i) / var;
    }
    return score;
}

PlDetector::PlDetector(std::vector<CovarianceTracker> initial, double threshold, double floor_eps,
                       bool rollback)
    : trackers_(std::move(initial)), threshold_(threshold), floor_eps_(floor_eps),
      rollback_(rollback) {
    if (trackers_.empty()) {
        throw ConfigError("PlDetector: at least one virtual link required");
    }
    models_.reserve(trackers_.size());
    for (const auto& t : trackers_) models_.push_back(fit_cca(t, floor_eps_));
}

PlVerdict PlDetector::step(const std::vector<std::pair<Vec, Vec>>& pairs) {
    if (pairs.size() != trackers_.size()) {
        throw DimensionError("pl_step: expected " + std::to_string(trackers_.size()) +
                             " sample pairs, got " + std::to_string(pairs.size()));
    }

    std::vector<CovarianceTracker> next_trackers = trackers_;
    std::vector<CcaModel> next_models(trackers_.size());

    PlVerdict verdict;
    verdict.time = ++time_;
    verdict.threshold = threshold_;
    verdict.per_vl_scores.resize(pairs.size());

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        next_trackers[i].update(pairs[i].first, pairs[i].second);
        next_models[i] = fit_cca(next_trackers[i], floor_eps_);
        const Vec r = residual(next_models[i], pairs[i].first, pairs[i].second);
        verdict.per_vl_scores[i] = t2_score(next_models[i], r, floor_eps_);
        if (verdict.per_vl_scores[i] > threshold_) verdict.is_anomalous = true;
    }

    verdict.committed = !verdict.is_anomalous || !rollback_;
    if (verdict.committed) {
        trackers_ = std::move(next_trackers);
        models_ = std::move(next_models);
    }
    return verdict;
}

}  // namespace slicewatch
