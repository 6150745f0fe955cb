#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace uhedge {

/// Seeded generator with platform-independent normal draws.
///
/// `std::normal_distribution` is implementation defined, which would make the
/// bundled fixtures and optimizer restarts differ between standard libraries.
/// Draws here depend only on the mt19937_64 bit stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        const auto bits = engine_() >> 11;  // 53 significant bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Student-t with `dof` degrees of freedom, rescaled to unit variance.
    double student_t_unit(double dof) {
        double chi2 = 0.0;
        // dof is small and integral in every caller
        for (int i = 0; i < static_cast<int>(dof); ++i) {
            const double z = normal();
            chi2 += z * z;
        }
        const double t = normal() / std::sqrt(chi2 / dof);
        return t * std::sqrt((dof - 2.0) / dof);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace uhedge
