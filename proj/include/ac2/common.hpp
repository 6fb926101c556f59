#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ac2 {

enum class ErrorKind {
  InvalidInput,
  Numerical,
  Config,
  Solver,
  Geometry,
  InsufficientData,
  Structural,
  Qualitative
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// wrap angle into [0, 2*pi)
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

// wrap angle into (-pi, pi]
inline double wrap_signed(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a > kPi) a -= 2.0 * kPi;
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

// FNV-1a, used to stamp reports with a config hash
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline constexpr const char* kToolVersion = "ac2lab 0.1.0";

}  // namespace ac2
