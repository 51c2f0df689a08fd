#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "metatune/hparam_space.hpp"

namespace metatune {

/// Matérn 5/2 ARD kernel parameters, in normalized-cube units.
struct KernelParams {
    std::vector<double> lengthscales;
    double signal_variance = 1.0;
    double noise_variance = 1e-6;

    friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// BO history: normalized points with their observed scores.
struct ObservationDataset {
    std::vector<UnitVector> points;
    std::vector<double> outputs;

    [[nodiscard]] std::size_t size() const noexcept { return outputs.size(); }
    [[nodiscard]] bool empty() const noexcept { return outputs.empty(); }
    void add(UnitVector x, double y);
};

inline constexpr double kNoiseFloor = 1e-8;
inline constexpr double kInitialJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-4;

double kernel_eval(const KernelParams& params, std::span<const double> x1, std::span<const double> x2);

/// Gram matrix K(X, X) without noise.
Eigen::MatrixXd gram_matrix(const KernelParams& params, const std::vector<UnitVector>& points);

/// GP evidence for outputs under a constant prior mean.
double log_marginal_likelihood(const ObservationDataset& data, const KernelParams& params, double prior_mean);

/// Candidate kernels searched by GPModel::fit, in evaluation order.
/// output_variance is the variance of the (standardized) outputs.
std::vector<KernelParams> kernel_grid(std::size_t dim, double output_variance);

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// Fitted, immutable Gaussian-process surrogate.
///
/// Outputs are modelled as prior_mean + output_scale * g(x), with g a
/// zero-mean GP under kernel(). fit() standardizes the outputs and picks the
/// kernel by maximum marginal likelihood over kernel_grid(); fit_with_params()
/// keeps the raw output scale and uses the given kernel as is.
class GPModel {
public:
    /// Empty-data model returning (prior_mean, signal_variance) everywhere.
    static GPModel prior(std::size_t dim, double prior_mean = 0.0, double signal_variance = 1.0);
    static GPModel fit(const ObservationDataset& data, std::size_t dim);
    static GPModel fit_with_params(const ObservationDataset& data, const KernelParams& params);

    [[nodiscard]] Prediction predict(std::span<const double> x) const;

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] double prior_mean() const noexcept { return prior_mean_; }
    [[nodiscard]] double output_scale() const noexcept { return output_scale_; }
    [[nodiscard]] const KernelParams& kernel() const noexcept { return kernel_; }
    [[nodiscard]] const ObservationDataset& dataset() const noexcept { return data_; }
    [[nodiscard]] double jitter() const noexcept { return jitter_; }
    [[nodiscard]] double log_likelihood() const noexcept { return log_likelihood_; }
    /// Lower Cholesky factor of K + (noise + jitter) I in standardized units.
    [[nodiscard]] const Eigen::MatrixXd& factor() const noexcept { return factor_; }

private:
    GPModel() = default;
    void factorize(const std::vector<double>& standardized);

    std::size_t dim_ = 0;
    double prior_mean_ = 0.0;
    double output_scale_ = 1.0;
    KernelParams kernel_;
    ObservationDataset data_;
    Eigen::MatrixXd factor_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
    double log_likelihood_ = 0.0;
};

}  // namespace metatune
