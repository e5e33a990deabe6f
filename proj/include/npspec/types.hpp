#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace npspec {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
// Rotate by -90 degrees: outward normal of a counterclockwise tangent.
constexpr Vec2 rot_cw(Vec2 a) { return {a.y, -a.x}; }
constexpr Vec2 rot_ccw(Vec2 a) { return {-a.y, a.x}; }

// Error hierarchy. Every failure the library reports derives from Error so
// callers can catch one type; the subclasses name the failing contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class MeshingError : public Error { public: using Error::Error; };
class AssemblyError : public Error { public: using Error::Error; };
class ContractError : public Error { public: using Error::Error; };
class InvalidSource : public Error { public: using Error::Error; };
class PoleError : public Error { public: using Error::Error; };
class DiscretizationError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

class NearSingularError : public Error {
 public:
  NearSingularError(const std::string& what, double cond) : Error(what), cond_(cond) {}
  double condition_estimate() const { return cond_; }

 private:
  double cond_;
};

class CompressionError : public Error {
 public:
  CompressionError(const std::string& what, int level) : Error(what), level_(level) {}
  int level_reached() const { return level_; }

 private:
  int level_;
};

}  // namespace npspec
