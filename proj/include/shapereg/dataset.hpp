#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace shapereg {

/// A regression sample: n covariate rows in [0,1]^d plus n responses.
/// Storage is row-major; rows are exposed as spans.
struct Dataset {
    std::vector<double> x; ///< n*d covariates, row-major
    std::vector<double> y; ///< n responses
    int d = 1;

    Dataset() = default;
    Dataset(std::vector<double> x_, std::vector<double> y_, int d_)
        : x(std::move(x_)), y(std::move(y_)), d(d_) {
        validate();
    }

    std::size_t n() const { return y.size(); }

    std::span<const double> row(std::size_t i) const {
        return {x.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }

    void validate() const {
        if (d < 1) throw std::invalid_argument("Dataset: d must be >= 1");
        if (x.size() != y.size() * static_cast<std::size_t>(d))
            throw std::invalid_argument("Dataset: x/y size mismatch");
        for (double v : x)
            if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite covariate");
        for (double v : y)
            if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite response");
    }
};

} // namespace shapereg
