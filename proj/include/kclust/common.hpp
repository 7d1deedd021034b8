#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Counter-based splittable PRNG (splitmix64). Every point / restart /
/// replicate derives its own stream from (seed, index), so parallel and
/// serial generation produce identical output.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1], safe as a log() argument
    double next_open_double() { return 1.0 - next_double(); }

    // standard normal via Box-Muller; avoids implementation-defined
    // std::normal_distribution so output is bit-stable across platforms
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = next_open_double();
        double v = next_double();
        double mag = std::sqrt(-2.0 * std::log(u));
        spare_ = mag * std::sin(2.0 * M_PI * v);
        have_spare_ = true;
        return mag * std::cos(2.0 * M_PI * v);
    }

    /// Derive an independent stream for a sub-task.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
        return g.next_u64();
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

}  // namespace kclust
