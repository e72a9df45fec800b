#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace nlpfspl {

/// One training pair: predictor vector and response.
struct PlsSample {
    std::vector<double> x;
    double y = 0.0;

    bool operator==(const PlsSample&) const = default;
};

/// Fitted single-response PLS regression. Prediction is
/// intercept + x . coefficients; predictors dropped for zero variance carry a
/// zero coefficient.
struct PlsModel {
    std::size_t predictors = 0;
    std::size_t components = 0;  // latent components actually extracted
    std::vector<double> x_mean;
    double y_mean = 0.0;
    std::vector<double> coefficients;
    double intercept = 0.0;
    std::vector<std::size_t> dropped;  // zero-variance predictor indices
    std::vector<std::string> warnings;

    double predict_raw(const std::vector<double>& x) const
    {
        if (x.size() != predictors) {
            throw ValidationError("pls_predict: expected " + std::to_string(predictors) + " predictors, got " +
                                  std::to_string(x.size()));
        }
        double out = intercept;
        for (std::size_t i = 0; i < predictors; ++i) {
            out += x[i] * coefficients[i];
        }
        return out;
    }
};

inline std::size_t default_pls_components(std::size_t predictors, std::size_t samples)
{
    return std::min<std::size_t>({3, predictors, samples > 0 ? samples - 1 : 0});
}

/// PLS1 by NIPALS on centred data:
///   w = X'y / |X'y|, t = Xw, p = X't / t't, q = y't / t't,
///   X <- X - tp', y <- y - qt,
/// and B = W (P'W)^-1 q. Stops early once X'y vanishes. `components`
/// defaults to min(3, predictors, samples - 1) and is capped the same way.
inline PlsModel pls_fit(const std::vector<PlsSample>& samples, std::optional<std::size_t> components = std::nullopt)
{
    if (samples.size() < 2) {
        throw ValidationError("pls_fit needs at least 2 samples, got " + std::to_string(samples.size()));
    }
    const std::size_t n = samples.size();
    const std::size_t p = samples.front().x.size();
    if (p == 0) {
        throw ValidationError("pls_fit needs at least one predictor");
    }
    for (const auto& s : samples) {
        if (s.x.size() != p) {
            throw ValidationError("pls_fit: inconsistent predictor dimension");
        }
        if (!std::isfinite(s.y) || !std::all_of(s.x.begin(), s.x.end(), [](double v) { return std::isfinite(v); })) {
            throw ValidationError("pls_fit: non-finite sample value");
        }
    }
    if (components && *components < 1) {
        throw ValidationError("pls_fit: components must be >= 1");
    }

    PlsModel m;
    m.predictors = p;
    m.x_mean.assign(p, 0.0);
    m.coefficients.assign(p, 0.0);

    Eigen::MatrixXd Xfull(n, p);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < p; ++k) {
            Xfull(i, k) = samples[i].x[k];
        }
        y(i) = samples[i].y;
    }
    const Eigen::VectorXd xm = Xfull.colwise().mean();
    for (std::size_t k = 0; k < p; ++k) {
        m.x_mean[k] = xm(k);
    }
    m.y_mean = y.mean();

    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < p; ++k) {
        if (Xfull.col(k).maxCoeff() == Xfull.col(k).minCoeff()) {
            m.dropped.push_back(k);
            m.warnings.push_back("predictor " + std::to_string(k) + " has zero variance; dropped");
        } else {
            active.push_back(k);
        }
    }

    m.intercept = m.y_mean;
    if (active.empty()) {
        return m;
    }
    const std::size_t pa = active.size();
    std::size_t a_max = default_pls_components(pa, n);
    if (components) {
        a_max = std::min(*components, std::min(pa, n - 1));
    }

    Eigen::MatrixXd X(n, pa);
    for (std::size_t c = 0; c < pa; ++c) {
        X.col(c) = Xfull.col(active[c]).array() - xm(active[c]);
    }
    Eigen::VectorXd r = y.array() - m.y_mean;

    Eigen::MatrixXd W(pa, a_max);
    Eigen::MatrixXd P(pa, a_max);
    Eigen::VectorXd q(a_max);
    const double scale = std::max(1.0, X.norm() * std::max(1.0, r.norm()));
    std::size_t a = 0;
    for (; a < a_max; ++a) {
        Eigen::VectorXd w = X.transpose() * r;
        const double wn = w.norm();
        if (wn <= 1e-12 * scale) {
            break;
        }
        w /= wn;
        const Eigen::VectorXd t = X * w;
        const double tt = t.squaredNorm();
        if (tt <= 0.0) {
            break;
        }
        const Eigen::VectorXd pl = X.transpose() * t / tt;
        const double qa = r.dot(t) / tt;
        X -= t * pl.transpose();
        r -= qa * t;
        W.col(a) = w;
        P.col(a) = pl;
        q(a) = qa;
    }
    m.components = a;
    if (a == 0) {
        return m;
    }
    const Eigen::MatrixXd Wa = W.leftCols(a);
    const Eigen::MatrixXd PtW = P.leftCols(a).transpose() * Wa;
    const Eigen::VectorXd B = Wa * PtW.partialPivLu().solve(q.head(a));
    for (std::size_t c = 0; c < pa; ++c) {
        m.coefficients[active[c]] = B(c);
        m.intercept -= xm(active[c]) * B(c);
    }
    return m;
}

/// Prediction clamped to [0,1].
inline double pls_predict(const PlsModel& model, const std::vector<double>& x)
{
    return std::clamp(model.predict_raw(x), 0.0, 1.0);
}

/// Similarity regression over an accumulating training archive. Each
/// retrain refits on the whole archive, so the result equals a fit from
/// scratch on the same samples.
class SimilarityModel {
  public:
    SimilarityModel() = default;
    explicit SimilarityModel(std::optional<std::size_t> components) : m_components(components) {}

    const std::vector<PlsSample>& archive() const noexcept { return m_archive; }
    const std::optional<PlsModel>& model() const noexcept { return m_model; }
    std::optional<std::size_t> components() const noexcept { return m_components; }
    std::size_t version() const noexcept { return m_version; }
    bool trained() const noexcept { return m_model.has_value(); }

    /// Appends the samples and refits.
    void retrain(const std::vector<PlsSample>& added)
    {
        std::vector<PlsSample> next = m_archive;
        next.insert(next.end(), added.begin(), added.end());
        PlsModel fitted = pls_fit(next, m_components);
        m_archive = std::move(next);
        m_model = std::move(fitted);
        ++m_version;
    }

    /// Restores an archive and refits when it holds at least two samples.
    void restore(std::vector<PlsSample> archive, std::size_t version)
    {
        m_archive = std::move(archive);
        m_model.reset();
        if (m_archive.size() >= 2) {
            m_model = pls_fit(m_archive, m_components);
        }
        m_version = version;
    }

    double predict(const std::vector<double>& x) const
    {
        if (!m_model) {
            throw ValidationError("similarity model is not trained");
        }
        return pls_predict(*m_model, x);
    }

  private:
    std::optional<std::size_t> m_components;
    std::vector<PlsSample> m_archive;
    std::optional<PlsModel> m_model;
    std::size_t m_version = 0;
};

}  // namespace nlpfspl
