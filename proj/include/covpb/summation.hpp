#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

namespace covpb {

/// Neumaier compensated accumulator. Summation order is part of the
/// contract: reductions over modes always run in lattice order so results
/// are bit-reproducible across runs.
class KahanSum {
public:
    void add(double value) {
        const double t = sum_ + value;
        if (std::abs(sum_) >= std::abs(value)) {
            comp_ += (sum_ - t) + value;
        } else {
            comp_ += (value - t) + sum_;
        }
        sum_ = t;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class KahanComplexSum {
public:
    void add(std::complex<double> value) {
        re_.add(value.real());
        im_.add(value.imag());
    }

    std::complex<double> value() const { return {re_.value(), im_.value()}; }

private:
    KahanSum re_;
    KahanSum im_;
};

/// Fixed-order compensated sum of f(i) for i in [0, n). Throws on
/// non-finite summands instead of propagating NaN silently.
template <class F>
double checked_sum(std::size_t n, F&& f) {
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = f(i);
        if (!std::isfinite(v)) {
            throw std::domain_error("checked_sum: non-finite summand at index " +
                                    std::to_string(i));
        }
        acc.add(v);
    }
    return acc.value();
}

} // namespace covpb
