#include "metatune/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

#include "metatune/errors.hpp"

namespace metatune {

void ObservationDataset::add(UnitVector x, double y) {
    points.push_back(std::move(x));
    outputs.push_back(y);
}

double kernel_eval(const KernelParams& params, std::span<const double> x1, std::span<const double> x2) {
    const std::size_t d = params.lengthscales.size();
    if (x1.size() != d || x2.size() != d) {
        std::ostringstream os;
        os << "kernel_eval: expected dimension " << d << ", got " << x1.size() << " and " << x2.size();
        throw ShapeError(os.str());
    }
    double r2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double z = (x1[i] - x2[i]) / params.lengthscales[i];
        r2 += z * z;
    }
    const double s5r = std::sqrt(5.0 * r2);
    return params.signal_variance * (1.0 + s5r + 5.0 * r2 / 3.0) * std::exp(-s5r);
}

Eigen::MatrixXd gram_matrix(const KernelParams& params, const std::vector<UnitVector>& points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = kernel_eval(params, points[i], points[i]);
        for (Eigen::Index j = 0; j < i; ++j) {
            k(i, j) = kernel_eval(params, points[i], points[j]);
            k(j, i) = k(i, j);
        }
    }
    return k;
}

namespace {

struct Factorization {
    Eigen::MatrixXd lower;
    double jitter = 0.0;
};

// Cholesky of K + noise*I with bounded jitter escalation.
Factorization factorize_gram(const Eigen::MatrixXd& k, double noise) {
    const auto n = k.rows();
    Eigen::MatrixXd a = k;
    a.diagonal().array() += noise;
    double jitter = 0.0;
    while (true) {
        Eigen::LLT<Eigen::MatrixXd> llt(a + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
        jitter = jitter == 0.0 ? kInitialJitter : jitter * 10.0;
        if (jitter > kMaxJitter * (1.0 + 1e-9))
            throw NumericalError("GP covariance not positive definite after maximum jitter");
    }
}

void check_dataset(const ObservationDataset& data, std::size_t dim) {
    if (data.points.size() != data.outputs.size())
        throw ShapeError("dataset has mismatched point and output counts");
    for (const auto& p : data.points)
        if (p.size() != dim) throw ShapeError("dataset point dimension mismatch");
}

double lml_from_factor(const Factorization& f, const Eigen::VectorXd& residual) {
    const Eigen::VectorXd v = f.lower.triangularView<Eigen::Lower>().solve(residual);
    const double log_det_half = f.lower.diagonal().array().log().sum();
    const auto n = static_cast<double>(residual.size());
    return -0.5 * v.squaredNorm() - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

double log_marginal_likelihood(const ObservationDataset& data, const KernelParams& params, double prior_mean) {
    if (data.empty()) throw DomainError("log_marginal_likelihood: empty dataset");
    check_dataset(data, params.lengthscales.size());
    const auto f = factorize_gram(gram_matrix(params, data.points), std::max(params.noise_variance, kNoiseFloor));
    const Eigen::VectorXd residual = to_eigen(data.outputs).array() - prior_mean;
    return lml_from_factor(f, residual);
}

std::vector<KernelParams> kernel_grid(std::size_t dim, double output_variance) {
    static constexpr double kLengthscales[] = {0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
    static constexpr double kSignal[] = {0.25, 1.0, 4.0};
    static constexpr double kNoise[] = {1e-6, 1e-4, 1e-2};
    const double var = output_variance > 1e-12 ? output_variance : 1.0;
    std::vector<KernelParams> grid;
    for (const double l : kLengthscales)
        for (const double s : kSignal)
            for (const double e : kNoise)
                grid.push_back({std::vector<double>(dim, l), s * var, std::max(e * var, kNoiseFloor)});
    return grid;
}

GPModel GPModel::prior(std::size_t dim, double prior_mean, double signal_variance) {
    GPModel m;
    m.dim_ = dim;
    m.prior_mean_ = prior_mean;
    m.kernel_ = {std::vector<double>(dim, 1.0), signal_variance, kNoiseFloor};
    return m;
}

void GPModel::factorize(const std::vector<double>& standardized) {
    const auto f = factorize_gram(gram_matrix(kernel_, data_.points), kernel_.noise_variance);
    factor_ = f.lower;
    jitter_ = f.jitter;
    const Eigen::VectorXd y = to_eigen(standardized);
    const Eigen::VectorXd half = factor_.triangularView<Eigen::Lower>().solve(y);
    alpha_ = factor_.transpose().triangularView<Eigen::Upper>().solve(half);
    log_likelihood_ = lml_from_factor(f, y);
}

GPModel GPModel::fit(const ObservationDataset& data, std::size_t dim) {
    if (data.empty()) throw DomainError("GP fit: empty dataset");
    check_dataset(data, dim);

    const auto n = static_cast<double>(data.size());
    const double mean = std::accumulate(data.outputs.begin(), data.outputs.end(), 0.0) / n;
    double ss = 0.0;
    for (const double y : data.outputs) ss += (y - mean) * (y - mean);
    const double sd = std::sqrt(ss / n);
    const double scale = sd > 1e-12 ? sd : 1.0;

    ObservationDataset standardized{data.points, {}};
    standardized.outputs.reserve(data.size());
    for (const double y : data.outputs) standardized.outputs.push_back((y - mean) / scale);
    double var = 0.0;
    for (const double y : standardized.outputs) var += y * y;
    var /= n;

    std::optional<KernelParams> best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (const auto& candidate : kernel_grid(dim, var)) {
        double lml;
        try {
            lml = log_marginal_likelihood(standardized, candidate, 0.0);
        } catch (const NumericalError&) {
            continue;
        }
        if (lml > best_lml) {
            best_lml = lml;
            best = candidate;
        }
    }
    if (!best) throw NumericalError("GP fit: no kernel candidate could be factorized");

    GPModel m;
    m.dim_ = dim;
    m.prior_mean_ = mean;
    m.output_scale_ = scale;
    m.kernel_ = *best;
    m.data_ = data;
    m.factorize(standardized.outputs);
    return m;
}

GPModel GPModel::fit_with_params(const ObservationDataset& data, const KernelParams& params) {
    if (data.empty()) throw DomainError("GP fit: empty dataset");
    const std::size_t dim = params.lengthscales.size();
    check_dataset(data, dim);
    const double mean =
        std::accumulate(data.outputs.begin(), data.outputs.end(), 0.0) / static_cast<double>(data.size());

    GPModel m;
    m.dim_ = dim;
    m.prior_mean_ = mean;
    m.output_scale_ = 1.0;
    m.kernel_ = params;
    m.kernel_.noise_variance = std::max(params.noise_variance, kNoiseFloor);
    m.data_ = data;
    std::vector<double> centered;
    centered.reserve(data.size());
    for (const double y : data.outputs) centered.push_back(y - mean);
    m.factorize(centered);
    return m;
}

Prediction GPModel::predict(std::span<const double> x) const {
    if (x.size() != dim_) throw ShapeError("GP predict: input dimension mismatch");
    const double prior_var = kernel_eval(kernel_, x, x);
    if (data_.empty()) return {prior_mean_, output_scale_ * output_scale_ * prior_var};

    const auto n = static_cast<Eigen::Index>(data_.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel_eval(kernel_, x, data_.points[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd v = factor_.triangularView<Eigen::Lower>().solve(k);
    const double mean = prior_mean_ + output_scale_ * k.dot(alpha_);
    const double var = std::max(0.0, prior_var - v.squaredNorm());
    return {mean, output_scale_ * output_scale_ * var};
}

}  // namespace metatune
