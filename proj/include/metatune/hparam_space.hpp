#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "metatune/rng.hpp"

namespace metatune {

enum class Scale { linear, log10 };

std::string to_string(Scale scale);
Scale parse_scale(const std::string& text);

/// One tuned hyperparameter. Bounds are closed and in native units.
struct HyperparamDim {
    std::string name;
    double low = 0.0;
    double high = 1.0;
    Scale scale = Scale::linear;

    friend bool operator==(const HyperparamDim&, const HyperparamDim&) = default;
};

/// A point in the search space, in native units, ordered like the space's dims.
struct ThetaVector {
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    friend bool operator==(const ThetaVector&, const ThetaVector&) = default;
};

/// Normalized coordinates in [0,1]^d.
using UnitVector = std::vector<double>;

/// Ordered, immutable set of hyperparameter dimensions.
class HyperparamSpace {
public:
    HyperparamSpace() = default;
    explicit HyperparamSpace(std::vector<HyperparamDim> dims);

    [[nodiscard]] std::size_t dim() const noexcept { return dims_.size(); }
    [[nodiscard]] const std::vector<HyperparamDim>& dims() const noexcept { return dims_; }
    [[nodiscard]] const HyperparamDim& operator[](std::size_t i) const { return dims_[i]; }
    /// Index of the named dimension, or dim() when absent.
    [[nodiscard]] std::size_t index_of(const std::string& name) const;

    friend bool operator==(const HyperparamSpace&, const HyperparamSpace&) = default;

private:
    std::vector<HyperparamDim> dims_;
};

/// Native -> unit cube. Throws BoundsError naming the offending dimension.
UnitVector normalize(const HyperparamSpace& space, const ThetaVector& theta);

/// Unit cube -> native. Throws BoundsError for components outside [0,1].
ThetaVector denormalize(const HyperparamSpace& space, const UnitVector& u);

/// n points drawn uniformly in the unit cube and mapped to native units.
std::vector<ThetaVector> sample_uniform(const HyperparamSpace& space, std::size_t n, Rng& rng);
std::vector<UnitVector> sample_uniform_unit(std::size_t dim, std::size_t n, Rng& rng);

ThetaVector clip_to_bounds(const HyperparamSpace& space, const ThetaVector& theta);

/// name -> native value for every dimension of the space.
std::map<std::string, double> named_values(const HyperparamSpace& space, const ThetaVector& theta);

}  // namespace metatune
