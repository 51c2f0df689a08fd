#pragma once

#include <cstdint>
#include <vector>

#include "metatune/gp.hpp"
#include "metatune/hparam_space.hpp"
#include "metatune/meta_optimizer.hpp"
#include "metatune/rng.hpp"

namespace metatune {

/// Hypersphere random search centred on the best point so far.
struct RandomSearchState {
    UnitVector center;
    double radius = 0.2;
    double best_y = 0.0;
    bool has_best = false;

    /// Moves the centre to `u` when y beats the best so far.
    void observe(const UnitVector& u, double y);
};

inline constexpr int kMaxRejectionAttempts = 1000;

/// Uniform draw from the L2 ball around the centre (rejection from the
/// enclosing cube, falling back to a Gaussian offset with std radius/2),
/// clipped to the unit cube. Before any best exists, uniform over the cube.
UnitVector random_search_unit(const RandomSearchState& state, std::size_t dim, Rng& rng);
ThetaVector random_search_step(const RandomSearchState& state, const HyperparamSpace& space, Rng& rng);

/// Argmax of standard EI over a fresh candidate batch.
ThetaVector plain_bo_step(const GPModel& model, const HyperparamSpace& space, double f_star,
                          const OptimizerSettings& settings, const Rng& rng);

enum class BaselineKind { random_search, plain_bo };

/// Same record stream as optimize(), without BC pretraining or demonstrations.
OptimizationResult run_baseline(BaselineKind kind, const Problem& problem, const OptimizerSettings& settings,
                                std::uint64_t seed, bool record_timing = true);

}  // namespace metatune
