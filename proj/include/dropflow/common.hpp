#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dropflow {

template <int N> using Vec = Eigen::Matrix<double, N, 1>;
template <int N> using Mat = Eigen::Matrix<double, N, N>;

inline constexpr double kPi = 3.14159265358979323846;

// Lebesgue measure of the unit ball.
inline double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return kPi;
        case 3: return 4.0 * kPi / 3.0;
        default: throw std::invalid_argument("unit_ball_volume: n must be 1..3");
    }
}

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct SingularPointError : Error { using Error::Error; };
struct ResolutionError : Error { using Error::Error; };
struct AdmissibilityError : Error { using Error::Error; };
struct CalibrationError : Error { using Error::Error; };
struct GridMismatchError : Error { using Error::Error; };
struct DegenerateSetError : Error { using Error::Error; };
struct CapacityScaleError : Error { using Error::Error; };
struct TopologyError : Error { using Error::Error; };
struct SetupError : Error { using Error::Error; };
struct TruncationAbort : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace dropflow
