#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace sepopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Numerical tolerances shared by every module. Values are absolute.
namespace tol {
inline constexpr double zero = 1e-12;     // zero-direction / degenerate-vector guard
inline constexpr double support = 1e-12;  // comparisons against support values
inline constexpr double polar = 1e-9;     // polar membership slack
inline constexpr double newton = 1e-10;   // analytic-center gradient norm
}  // namespace tol

enum class ErrorCode {
    ZeroDirection,
    DimensionMismatch,
    InvalidBody,
    NoConvergence,
    DegenerateInstance,
    DegenerateUpdate,
    NotInterior,
    EmptyInterior,
    CannotDrop,
    DegenerateCut,
    CenterOriginFailure,
    OracleFailure,
    DimensionNot2D,
    InvalidInstance,
};

inline constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroDirection: return "ZeroDirection";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidBody: return "InvalidBody";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DegenerateInstance: return "DegenerateInstance";
        case ErrorCode::DegenerateUpdate: return "DegenerateUpdate";
        case ErrorCode::NotInterior: return "NotInterior";
        case ErrorCode::EmptyInterior: return "EmptyInterior";
        case ErrorCode::CannotDrop: return "CannotDrop";
        case ErrorCode::DegenerateCut: return "DegenerateCut";
        case ErrorCode::CenterOriginFailure: return "CenterOriginFailure";
        case ErrorCode::OracleFailure: return "OracleFailure";
        case ErrorCode::DimensionNot2D: return "DimensionNot2D";
        case ErrorCode::InvalidInstance: return "InvalidInstance";
    }
    return "Unknown";
}

/// Exception carrying a machine-readable code. `index` is set for errors
/// that point at a specific constraint (NotInterior) or iteration budget
/// (NoConvergence).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what), index_(index) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& message() const noexcept { return message_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::string message_;
    std::optional<std::size_t> index_;
};

inline void require_dimension(Eigen::Index expected, Eigen::Index got, const char* what) {
    if (expected != got) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": expected " + std::to_string(expected) + ", got " +
                        std::to_string(got));
    }
}

/// Small deterministic generator. The standard distributions are
/// implementation-defined, so sampling is done by hand on top of the
/// (fully specified) 64-bit Mersenne twister.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() { return state_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (spare_) {
            double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        return r * std::cos(theta);
    }

    Vector normal_vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    Vector unit_vector(Eigen::Index n) {
        Vector v = normal_vector(n);
        while (v.norm() < 1e-8) v = normal_vector(n);
        return v.normalized();
    }

private:
    std::mt19937_64 state_;
    std::optional<double> spare_;
};

}  // namespace sepopt
