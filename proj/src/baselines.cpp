#include "metatune/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "metatune/acquisition.hpp"

namespace metatune {

void RandomSearchState::observe(const UnitVector& u, double y) {
    if (!has_best || y > best_y) {
        center = u;
        best_y = y;
        has_best = true;
    }
}

UnitVector random_search_unit(const RandomSearchState& state, std::size_t dim, Rng& rng) {
    UnitVector u(dim);
    if (!state.has_best) {
        for (auto& c : u) c = rng.uniform();
        return u;
    }
    const double r = state.radius;
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxRejectionAttempts && !accepted; ++attempt) {
        double norm2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double off = rng.uniform(-r, r);
            u[i] = state.center[i] + off;
            norm2 += off * off;
        }
        accepted = norm2 <= r * r;
    }
    if (!accepted)
        for (std::size_t i = 0; i < dim; ++i) u[i] = state.center[i] + 0.5 * r * rng.normal();
    for (auto& c : u) c = std::clamp(c, 0.0, 1.0);
    return u;
}

ThetaVector random_search_step(const RandomSearchState& state, const HyperparamSpace& space, Rng& rng) {
    return denormalize(space, random_search_unit(state, space.dim(), rng));
}

ThetaVector plain_bo_step(const GPModel& model, const HyperparamSpace& space, double f_star,
                          const OptimizerSettings& settings, const Rng& rng) {
    Rng batch_rng = rng.derive("batch");
    const auto batch = candidate_batch(settings.sampler, space.dim(), static_cast<std::size_t>(settings.batch_size), batch_rng);
    return top_m_candidates(model, space, batch, f_star, 1).front().theta;
}

OptimizationResult run_baseline(BaselineKind kind, const Problem& problem, const OptimizerSettings& settings,
                                std::uint64_t seed, bool record_timing) {
    return run_optimizer(kind == BaselineKind::plain_bo ? OptimizerKind::rlopt : OptimizerKind::random_search, problem,
                         settings, seed, record_timing);
}

}  // namespace metatune
