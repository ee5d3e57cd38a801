#pragma once

#include "sloshfree/common.hpp"

#include <array>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

namespace sloshfree {

/// Progress variable s(t) in [0,1] with its first four time derivatives.
struct ScalingSample {
  double s = 0.0, sd = 0.0, sdd = 0.0, sddd = 0.0, sdddd = 0.0;
};

/// Ninth-order rest-to-rest time law: s(0)=0, s(T)=1, and the first four
/// derivatives vanish at both endpoints, so any C^4 path reparametrised by it
/// starts and ends with zero velocity through snap.  Peak speed is
/// (630/256)/T at the midpoint and s is strictly monotone inside (0,T).
inline ScalingSample time_scaling(double T, double t) {
  if (!(T > 0.0)) throw Error("time_scaling: navigation time must be positive");
  if (t < -1e-9 * T || t > T * (1.0 + 1e-9))
    throw Error("time_scaling: query time outside [0, T]");
  const double u = std::clamp(t / T, 0.0, 1.0);
  // s(u) = 126 u^5 - 420 u^6 + 540 u^7 - 315 u^8 + 70 u^9, differentiated
  // termwise; each time derivative picks up one factor of 1/T.
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  const double w = 1.0 - u;
  ScalingSample out;
  // The law is symmetric about the midpoint, s(u) = 1 - s(1-u); evaluating
  // the upper half through the reflection keeps s monotone and inside [0,1]
  // to the last bit where the direct polynomial suffers cancellation.
  auto half = [](double v) {
    const double v5 = v * v * v * v * v;
    return ((((70.0 * v - 315.0) * v + 540.0) * v - 420.0) * v + 126.0) * v5;
  };
  out.s = u <= 0.5 ? half(u) : 1.0 - half(w);
  // sd = 630 u^4 (1-u)^4 / T: the factored form cannot go negative.
  out.sd = 630.0 * u4 * (w * w * w * w) / T;
  out.sdd = ((((5040.0 * u - 17640.0) * u + 22680.0) * u - 12600.0) * u + 2520.0) * u3 / (T * T);
  out.sddd =
      ((((35280.0 * u - 105840.0) * u + 113400.0) * u - 50400.0) * u + 7560.0) * u2 / (T * T * T);
  out.sdddd = ((((211680.0 * u - 529200.0) * u + 453600.0) * u - 151200.0) * u + 15120.0) * u /
              (T * T * T * T);
  return out;
}

/// A path point Gamma(s) with derivatives w.r.t. the progress variable.
struct ShapeJet {
  Vec3 g0 = Vec3::Zero();
  Vec3 g1 = Vec3::Zero();
  Vec3 g2 = Vec3::Zero();
  Vec3 g3 = Vec3::Zero();
  Vec3 g4 = Vec3::Zero();
};

namespace detail {

/// Writes c*f^k * d^k/dx^k [sin(f*x + phi)] for k = 0..4 into the given axis
/// of the jet.  The sine derivative cycle is sin, cos, -sin, -cos.
inline void add_harmonic(ShapeJet& jet, int axis, double c, double f, double phi, double x) {
  const double arg = f * x + phi;
  const double sn = std::sin(arg), cs = std::cos(arg);
  const double f2 = f * f, f3 = f2 * f, f4 = f3 * f;
  jet.g0(axis) += c * sn;
  jet.g1(axis) += c * f * cs;
  jet.g2(axis) += -c * f2 * sn;
  jet.g3(axis) += -c * f3 * cs;
  jet.g4(axis) += c * f4 * sn;
}

}  // namespace detail

/// Circle of the given radius traced once per cycle, in a plane tilted about
/// the world y axis through the center.  The cycle starts on the inner (-x)
/// side of the tilted circle, so the speed peak at mid-trajectory falls on
/// the far side where the end effector moves tangentially along y and the
/// arm holds its best-conditioned posture.
struct LoopShape {
  Vec3 center{0.45, 0.0, 0.35};
  double radius = 0.25;
  double tilt = 0.3;  // [rad] rotation of the path plane about world y

  ShapeJet jet(double s) const {
    const double w = 2.0 * std::numbers::pi;
    const double arg = w * s + std::numbers::pi;
    const double c = std::cos(arg), sn = std::sin(arg);
    const Mat3 Rt = rot_y(tilt);
    ShapeJet out;
    out.g0 = center + Rt * (radius * Vec3(c, sn, 0.0));
    out.g1 = Rt * (radius * w * Vec3(-sn, c, 0.0));
    out.g2 = Rt * (radius * w * w * Vec3(-c, -sn, 0.0));
    out.g3 = Rt * (radius * w * w * w * Vec3(sn, -c, 0.0));
    out.g4 = Rt * (radius * w * w * w * w * Vec3(c, sn, 0.0));
    return out;
  }
};

/// Lissajous figure with per-axis frequency multiples (2, 3, 1) of the base
/// rate, so one cycle traces the full figure.
struct LissajousShape {
  Vec3 center{0.45, 0.0, 0.35};
  Vec3 amplitude{0.25, 0.2, 0.1};
  double omega = 2.0 * std::numbers::pi;

  ShapeJet jet(double s) const {
    ShapeJet out;
    out.g0 = center;
    detail::add_harmonic(out, 0, amplitude.x(), 2.0 * omega, 0.0, s);
    detail::add_harmonic(out, 1, amplitude.y(), 3.0 * omega, 0.0, s);
    detail::add_harmonic(out, 2, amplitude.z(), omega, 0.0, s);
    return out;
  }
};

/// Rising helix: `turns` revolutions at the given radius while climbing
/// `height`, centered vertically on the center point.  The cycle starts on
/// the -y side of the cylinder, which keeps the climb away from the reach
/// boundary of the arm for the longest stretch of the path.
struct HelixShape {
  Vec3 center{0.45, 0.0, 0.35};
  double radius = 0.2;
  double turns = 2.0;
  double height = 0.4;

  ShapeJet jet(double s) const {
    const double w = 2.0 * std::numbers::pi * turns;
    const double arg = w * s + 1.5 * std::numbers::pi;
    const double c = std::cos(arg), sn = std::sin(arg);
    ShapeJet out;
    out.g0 = center + Vec3(radius * c, radius * sn, height * (s - 0.5));
    out.g1 = Vec3(-radius * w * sn, radius * w * c, height);
    out.g2 = Vec3(-radius * w * w * c, -radius * w * w * sn, 0.0);
    out.g3 = Vec3(radius * w * w * w * sn, -radius * w * w * w * c, 0.0);
    out.g4 = Vec3(radius * w * w * w * w * c, radius * w * w * w * w * sn, 0.0);
    return out;
  }
};

struct HarmonicTerm {
  double amplitude = 0.0;
  double frequency = 1.0;  // cycles per unit of s
  double phase = 0.0;
};

/// Free-form path built from per-axis harmonic series; smooth by
/// construction, so arbitrary user paths keep the C^4 guarantee the
/// time law relies on.
struct CustomShape {
  Vec3 center{0.45, 0.0, 0.35};
  std::array<std::vector<HarmonicTerm>, 3> harmonics;

  ShapeJet jet(double s) const {
    ShapeJet out;
    out.g0 = center;
    for (int axis = 0; axis < 3; ++axis)
      for (const HarmonicTerm& h : harmonics[static_cast<size_t>(axis)])
        detail::add_harmonic(out, axis, h.amplitude, 2.0 * std::numbers::pi * h.frequency,
                             h.phase, s);
    return out;
  }
};

using Shape = std::variant<LoopShape, LissajousShape, HelixShape, CustomShape>;

inline std::string shape_name(const Shape& shape) {
  struct Visitor {
    std::string operator()(const LoopShape&) const { return "loop"; }
    std::string operator()(const LissajousShape&) const { return "lissajous"; }
    std::string operator()(const HelixShape&) const { return "helix"; }
    std::string operator()(const CustomShape&) const { return "custom"; }
  };
  return std::visit(Visitor{}, shape);
}

/// Position reference and its time derivatives through snap.
struct ReferenceSample {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Vec3 j = Vec3::Zero();
  Vec3 s = Vec3::Zero();  // snap
};

/// A shape composed with the rest-to-rest time law on [t0, tf].
class Trajectory {
 public:
  Trajectory(Shape shape, double t0, double tf) : shape_(std::move(shape)), t0_(t0), tf_(tf) {
    if (!(tf > t0)) throw Error("trajectory window must have tf > t0");
  }

  double t0() const { return t0_; }
  double tf() const { return tf_; }
  double duration() const { return tf_ - t0_; }
  const Shape& shape() const { return shape_; }
  std::string kind() const { return shape_name(shape_); }

  Vec3 start_position() const {
    return std::visit([](const auto& s) { return s.jet(0.0).g0; }, shape_);
  }

  /// Sample the reference at time t (must lie in [t0, tf]).  Derivatives are
  /// chained through the time law up to fourth order:
  ///   p'''' = g4 sd^4 + 6 g3 sd^2 sdd + g2 (3 sdd^2 + 4 sd sddd) + g1 sdddd
  ReferenceSample sample(double t) const {
    const ScalingSample sc = time_scaling(duration(), t - t0_);
    const ShapeJet g = std::visit([&](const auto& s) { return s.jet(sc.s); }, shape_);
    ReferenceSample out;
    out.t = t;
    out.p = g.g0;
    out.v = g.g1 * sc.sd;
    out.a = g.g2 * (sc.sd * sc.sd) + g.g1 * sc.sdd;
    out.j = g.g3 * (sc.sd * sc.sd * sc.sd) + 3.0 * g.g2 * (sc.sd * sc.sdd) + g.g1 * sc.sddd;
    out.s = g.g4 * (sc.sd * sc.sd * sc.sd * sc.sd) + 6.0 * g.g3 * (sc.sd * sc.sd * sc.sdd) +
            g.g2 * (3.0 * sc.sdd * sc.sdd + 4.0 * sc.sd * sc.sddd) + g.g1 * sc.sdddd;
    return out;
  }

 private:
  Shape shape_;
  double t0_ = 0.0;
  double tf_ = 1.0;
};

}  // namespace sloshfree
