#include "metatune/hparam_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "metatune/errors.hpp"

namespace metatune {

std::string to_string(Scale scale) { return scale == Scale::log10 ? "log10" : "linear"; }

Scale parse_scale(const std::string& text) {
    if (text == "linear") return Scale::linear;
    if (text == "log10") return Scale::log10;
    throw ConfigError("scale", "expected 'linear' or 'log10', got '" + text + "'");
}

HyperparamSpace::HyperparamSpace(std::vector<HyperparamDim> dims) : dims_(std::move(dims)) {
    std::set<std::string> seen;
    for (const auto& d : dims_) {
        if (d.name.empty()) throw ConfigError("name", "hyperparameter name must not be empty");
        if (!seen.insert(d.name).second) throw ConfigError(d.name, "duplicate hyperparameter name");
        if (!std::isfinite(d.low) || !std::isfinite(d.high) || !(d.low < d.high))
            throw ConfigError(d.name, "bounds must satisfy low < high");
        if (d.scale == Scale::log10 && !(d.low > 0.0))
            throw ConfigError(d.name, "log10 scale requires low > 0");
    }
}

std::size_t HyperparamSpace::index_of(const std::string& name) const {
    const auto it = std::find_if(dims_.begin(), dims_.end(), [&](const auto& d) { return d.name == name; });
    return static_cast<std::size_t>(it - dims_.begin());
}

namespace {

void check_size(const HyperparamSpace& space, std::size_t n) {
    if (n != space.dim()) {
        std::ostringstream os;
        os << "expected " << space.dim() << " components, got " << n;
        throw ShapeError(os.str());
    }
}

}  // namespace

UnitVector normalize(const HyperparamSpace& space, const ThetaVector& theta) {
    check_size(space, theta.size());
    UnitVector u(space.dim());
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto& d = space[i];
        const double v = theta[i];
        if (!(v >= d.low && v <= d.high)) {
            std::ostringstream os;
            os << "value " << v << " outside [" << d.low << ", " << d.high << "] for '" << d.name << "'";
            throw BoundsError(os.str());
        }
        if (d.scale == Scale::log10) {
            const double lo = std::log10(d.low);
            u[i] = (std::log10(v) - lo) / (std::log10(d.high) - lo);
        } else {
            u[i] = (v - d.low) / (d.high - d.low);
        }
        u[i] = std::clamp(u[i], 0.0, 1.0);
    }
    return u;
}

ThetaVector denormalize(const HyperparamSpace& space, const UnitVector& u) {
    check_size(space, u.size());
    ThetaVector theta{std::vector<double>(space.dim())};
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const auto& d = space[i];
        if (!(u[i] >= 0.0 && u[i] <= 1.0)) {
            std::ostringstream os;
            os << "normalized component " << u[i] << " outside [0, 1] for '" << d.name << "'";
            throw BoundsError(os.str());
        }
        double v;
        if (d.scale == Scale::log10) {
            const double lo = std::log10(d.low);
            v = std::pow(10.0, lo + u[i] * (std::log10(d.high) - lo));
        } else {
            v = d.low + u[i] * (d.high - d.low);
        }
        // Endpoints are exact; interior values stay inside despite pow/log rounding.
        if (u[i] == 0.0) v = d.low;
        if (u[i] == 1.0) v = d.high;
        theta[i] = std::clamp(v, d.low, d.high);
    }
    return theta;
}

std::vector<UnitVector> sample_uniform_unit(std::size_t dim, std::size_t n, Rng& rng) {
    if (n == 0) throw DomainError("sample_uniform: batch size must be at least 1");
    std::vector<UnitVector> out(n, UnitVector(dim));
    for (auto& u : out)
        for (auto& c : u) c = rng.uniform();
    return out;
}

std::vector<ThetaVector> sample_uniform(const HyperparamSpace& space, std::size_t n, Rng& rng) {
    std::vector<ThetaVector> out;
    out.reserve(n);
    for (const auto& u : sample_uniform_unit(space.dim(), n, rng)) out.push_back(denormalize(space, u));
    return out;
}

ThetaVector clip_to_bounds(const HyperparamSpace& space, const ThetaVector& theta) {
    check_size(space, theta.size());
    ThetaVector out = theta;
    for (std::size_t i = 0; i < space.dim(); ++i) out[i] = std::clamp(theta[i], space[i].low, space[i].high);
    return out;
}

std::map<std::string, double> named_values(const HyperparamSpace& space, const ThetaVector& theta) {
    check_size(space, theta.size());
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < space.dim(); ++i) out.emplace(space[i].name, theta[i]);
    return out;
}

}  // namespace metatune
