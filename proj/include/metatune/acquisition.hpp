#pragma once

#include <cstddef>
#include <vector>

#include "metatune/gp.hpp"
#include "metatune/hparam_space.hpp"
#include "metatune/rng.hpp"

namespace metatune {

double normal_pdf(double z);
double normal_cdf(double z);

/// Closed-form expected improvement of a Gaussian with the given mean and
/// standard deviation over f_star. Returns max(0, mean - f_star) when std == 0.
double expected_improvement(double mean, double std, double f_star);

/// Latin hypercube design in the unit cube: per dimension, one point in each
/// of the n equal strata.
std::vector<UnitVector> lhs_unit(std::size_t dim, std::size_t n, Rng& rng);
std::vector<ThetaVector> lhs_sample(const HyperparamSpace& space, std::size_t n, Rng& rng);

struct Candidate {
    ThetaVector theta;
    UnitVector u;
    double ei = 0.0;
    double predicted_mean = 0.0;
    double predicted_std = 0.0;
    std::size_t batch_index = 0;
};

/// Scores a batch of unit-cube points under the model.
std::vector<Candidate> score_candidates(const GPModel& model, const HyperparamSpace& space,
                                        const std::vector<UnitVector>& batch, double f_star);

/// The m candidates with highest EI, ordered by EI descending, then
/// predicted std descending, then batch index ascending.
std::vector<Candidate> top_m_candidates(const GPModel& model, const HyperparamSpace& space,
                                        const std::vector<UnitVector>& batch, double f_star, std::size_t m);
std::vector<Candidate> top_m_candidates(const GPModel& model, const HyperparamSpace& space,
                                        const std::vector<ThetaVector>& batch, double f_star, std::size_t m);

enum class CandidateSampler { lhs, uniform };

inline constexpr std::size_t kDefaultCandidateBatch = 500;

/// Candidate batch for one acquisition call.
std::vector<UnitVector> candidate_batch(CandidateSampler sampler, std::size_t dim, std::size_t n, Rng& rng);

}  // namespace metatune
