#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "rcmik/se3.hpp"

namespace rcmik::bench {

enum class PathKind { Helix, Lissajous };

inline const char* to_string(PathKind k) { return k == PathKind::Helix ? "helix" : "lissajous"; }

inline PathKind path_kind_from_string(const std::string& s) {
  if (s == "helix") return PathKind::Helix;
  if (s == "lissajous") return PathKind::Lissajous;
  throw ParseError("unknown path kind '" + s + "'");
}

/// Reference path with a fixed orientation. The parameter t runs linearly from
/// t_start to t_end over n_steps samples (both ends included).
struct PathSpec {
  PathKind kind = PathKind::Helix;
  Vector3 origin = Vector3::Zero();
  double amp_a = 0.035;  // helix radius, or lissajous x amplitude
  double amp_b = 0.0;    // lissajous y amplitude
  double amp_c = 0.0;    // lissajous z amplitude
  Matrix3 orientation = Matrix3::Identity();
  int n_steps = 2000;
  double t_start = 0.0;
  double t_end = 2.0;

  double t_at(int step) const {
    return t_start + (t_end - t_start) * static_cast<double>(step) / static_cast<double>(n_steps - 1);
  }

  void validate() const {
    if (!(amp_a > 0.0)) throw ValidationError("path: amplitude A must be positive");
    if (kind == PathKind::Lissajous && !(amp_b > 0.0 && amp_c > 0.0)) {
      throw ValidationError("path: lissajous amplitudes B and C must be positive");
    }
    if (orthonormality_defect(orientation) > 1e-10) {
      throw ValidationError("path: orientation is not a rotation matrix");
    }
    if (n_steps < 2) throw ValidationError("path: n_steps must be at least 2");
    if (!origin.allFinite() || !std::isfinite(t_start) || !std::isfinite(t_end)) {
      throw ValidationError("path: non-finite parameters");
    }
  }
};

/// origin + (A cos 2 pi t, A sin 2 pi t, 0.01 t).
inline Transform helix_point(double t, const PathSpec& spec) {
  const double w = 2.0 * std::numbers::pi * t;
  return {spec.orientation,
          spec.origin + Vector3(spec.amp_a * std::cos(w), spec.amp_a * std::sin(w), 0.01 * t)};
}

/// origin + (A sin t, B sin(2t + pi), C (cos 2t - 1)).
inline Transform lissajous_point(double t, const PathSpec& spec) {
  return {spec.orientation,
          spec.origin + Vector3(spec.amp_a * std::sin(t),
                                spec.amp_b * std::sin(2.0 * t + std::numbers::pi),
                                spec.amp_c * (std::cos(2.0 * t) - 1.0))};
}

inline Transform path_point(double t, const PathSpec& spec) {
  return spec.kind == PathKind::Helix ? helix_point(t, spec) : lissajous_point(t, spec);
}

}  // namespace rcmik::bench
