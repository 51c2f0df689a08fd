#include "metatune/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "metatune/errors.hpp"

namespace metatune {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double std, double f_star) {
    const double gap = mean - f_star;
    if (!(std > 0.0)) return std::max(0.0, gap);
    const double z = gap / std;
    const double ei = gap * normal_cdf(z) + std * normal_pdf(z);
    return std::max({ei, gap, 0.0});
}

std::vector<UnitVector> lhs_unit(std::size_t dim, std::size_t n, Rng& rng) {
    if (n == 0) throw DomainError("lhs_sample: batch size must be at least 1");
    std::vector<UnitVector> out(n, UnitVector(dim));
    std::vector<std::size_t> strata(n);
    const double width = 1.0 / static_cast<double>(n);
    for (std::size_t d = 0; d < dim; ++d) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        shuffle(strata, rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = (static_cast<double>(strata[i]) + rng.uniform()) * width;
            // Keep the point inside its own stratum despite rounding at the upper edge.
            out[i][d] = std::min(v, std::nextafter((static_cast<double>(strata[i]) + 1.0) * width, 0.0));
        }
    }
    return out;
}

std::vector<ThetaVector> lhs_sample(const HyperparamSpace& space, std::size_t n, Rng& rng) {
    std::vector<ThetaVector> out;
    out.reserve(n);
    for (const auto& u : lhs_unit(space.dim(), n, rng)) out.push_back(denormalize(space, u));
    return out;
}

std::vector<Candidate> score_candidates(const GPModel& model, const HyperparamSpace& space,
                                        const std::vector<UnitVector>& batch, double f_star) {
    std::vector<Candidate> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto p = model.predict(batch[i]);
        const double sd = std::sqrt(p.variance);
        out.push_back({denormalize(space, batch[i]), batch[i], expected_improvement(p.mean, sd, f_star), p.mean, sd, i});
    }
    return out;
}

std::vector<Candidate> top_m_candidates(const GPModel& model, const HyperparamSpace& space,
                                        const std::vector<UnitVector>& batch, double f_star, std::size_t m) {
    if (m == 0) throw DomainError("top_m_candidates: m must be at least 1");
    if (batch.size() < m) throw ShapeError("top_m_candidates: batch smaller than m");
    auto scored = score_candidates(model, space, batch, f_star);
    const auto better = [](const Candidate& a, const Candidate& b) {
        if (a.ei != b.ei) return a.ei > b.ei;
        if (a.predicted_std != b.predicted_std) return a.predicted_std > b.predicted_std;
        return a.batch_index < b.batch_index;
    };
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m), scored.end(), better);
    scored.resize(m);
    return scored;
}

std::vector<Candidate> top_m_candidates(const GPModel& model, const HyperparamSpace& space,
                                        const std::vector<ThetaVector>& batch, double f_star, std::size_t m) {
    std::vector<UnitVector> unit;
    unit.reserve(batch.size());
    for (const auto& t : batch) unit.push_back(normalize(space, t));
    auto out = top_m_candidates(model, space, unit, f_star, m);
    for (auto& c : out) c.theta = batch[c.batch_index];
    return out;
}

std::vector<UnitVector> candidate_batch(CandidateSampler sampler, std::size_t dim, std::size_t n, Rng& rng) {
    return sampler == CandidateSampler::lhs ? lhs_unit(dim, n, rng) : sample_uniform_unit(dim, n, rng);
}

}  // namespace metatune
