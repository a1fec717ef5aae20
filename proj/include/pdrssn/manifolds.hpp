#pragma once

// Manifold primitives for the unit 2-sphere and for 3x3 symmetric positive
// definite matrices with the affine-invariant metric.
//
// Each manifold is a stateless struct with static functions on raw point and
// vector values. The anchored API further down (Tangent, inner, exp, ...) is
// what the rest of the library uses; it checks that tangent vectors are used
// at the point they belong to.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pdrssn/errors.hpp"

namespace pdrssn {

enum class ManifoldKind { Sphere2, SPD3 };

int manifold_dim(ManifoldKind kind);
std::string_view to_string(ManifoldKind kind);
ManifoldKind manifold_kind_from_string(std::string_view name);

/// Orthonormal frame of a tangent space together with the eigenvalues of the
/// curvature operator R(., u)u for the unit direction u the frame is aligned
/// with. vectors[0] is parallel to u whenever u != 0.
template <class Vector, int Dim>
struct RawFrame {
  std::array<Vector, Dim> vectors;
  std::array<double, Dim> kappas{};
};

struct Sphere2 {
  using Point = Eigen::Vector3d;
  using Vector = Eigen::Vector3d;
  static constexpr int dim = 2;
  static constexpr ManifoldKind kind = ManifoldKind::Sphere2;
  /// log is rejected once the two points are closer than this to antipodal.
  static constexpr double antipodal_margin = 1e-9;

  static double inner(const Point& p, const Vector& x, const Vector& y);
  static double dist(const Point& p, const Point& q);
  static Point exp(const Point& p, const Vector& x);
  static Vector log(const Point& p, const Point& q);
  static Point geodesic(const Point& p, const Point& q, double t);
  static Vector transport(const Point& p, const Point& q, const Vector& x);
  /// Parallel transport of v along t -> exp_p(t x), t in [0, 1].
  static Vector transport_along(const Point& p, const Vector& x, const Vector& v);
  static std::array<Vector, dim> onb(const Point& p);
  static RawFrame<Vector, dim> curvature_frame(const Point& p, const Vector& direction);

  static Vector zero(const Point&) { return Vector::Zero(); }
  static Point normalize(const Point& p) { return p.normalized(); }
  static Vector project(const Point& p, const Vector& x) { return x - p.dot(x) * p; }
  static bool is_point(const Point& p, double tol = 1e-12);
  static bool is_tangent(const Point& p, const Vector& x, double tol = 1e-10);
  static bool same_point(const Point& p, const Point& q, double tol = 1e-10);
  static double max_abs(const Vector& x) { return x.cwiseAbs().maxCoeff(); }
};

struct Spd3 {
  using Point = Eigen::Matrix3d;
  using Vector = Eigen::Matrix3d;
  static constexpr int dim = 6;
  static constexpr ManifoldKind kind = ManifoldKind::SPD3;

  static double inner(const Point& p, const Vector& x, const Vector& y);
  static double dist(const Point& p, const Point& q);
  static Point exp(const Point& p, const Vector& x);
  static Vector log(const Point& p, const Point& q);
  static Point geodesic(const Point& p, const Point& q, double t);
  static Vector transport(const Point& p, const Point& q, const Vector& x);
  static Vector transport_along(const Point& p, const Vector& x, const Vector& v);
  static std::array<Vector, dim> onb(const Point& p);
  static RawFrame<Vector, dim> curvature_frame(const Point& p, const Vector& direction);

  static Vector zero(const Point&) { return Vector::Zero(); }
  static Point normalize(const Point& p) { return 0.5 * (p + p.transpose()); }
  static Vector project(const Point&, const Vector& x) { return 0.5 * (x + x.transpose()); }
  static bool is_point(const Point& p, double tol = 1e-12);
  static bool is_tangent(const Point& p, const Vector& x, double tol = 1e-12);
  static bool same_point(const Point& p, const Point& q, double tol = 1e-10);
  static double max_abs(const Vector& x) { return x.cwiseAbs().maxCoeff(); }
};

// Symmetric matrix functions via the eigendecomposition.
namespace spd {
Eigen::Matrix3d sqrtm(const Eigen::Matrix3d& a);
Eigen::Matrix3d invsqrtm(const Eigen::Matrix3d& a);
Eigen::Matrix3d expm(const Eigen::Matrix3d& a);
Eigen::Matrix3d logm(const Eigen::Matrix3d& a);
Eigen::Matrix3d powm(const Eigen::Matrix3d& a, double t);
}  // namespace spd

// ---------------------------------------------------------------------------
// Anchored tangent vectors.

template <class M>
struct Tangent {
  typename M::Point anchor;
  typename M::Vector value;
};

template <class M>
struct OrthonormalBasis {
  typename M::Point anchor;
  std::array<typename M::Vector, M::dim> vectors;
};

template <class M>
void check_anchor(const typename M::Point& p, const Tangent<M>& x, const char* where) {
  if (!M::same_point(p, x.anchor)) {
    throw AnchorError(std::string(where) + ": tangent vector is anchored at a different point");
  }
}

template <class M>
Tangent<M> zero_tangent(const typename M::Point& p) {
  return {p, M::zero(p)};
}

template <class M>
double inner(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& y) {
  check_anchor(p, x, "inner");
  check_anchor(p, y, "inner");
  return M::inner(p, x.value, y.value);
}

template <class M>
double norm(const Tangent<M>& x) {
  return std::sqrt(std::max(0.0, M::inner(x.anchor, x.value, x.value)));
}

template <class M>
double dist(const typename M::Point& p, const typename M::Point& q) {
  return M::dist(p, q);
}

template <class M>
typename M::Point exp(const typename M::Point& p, const Tangent<M>& x) {
  check_anchor(p, x, "exp");
  return M::exp(p, x.value);
}

template <class M>
Tangent<M> log(const typename M::Point& p, const typename M::Point& q) {
  return {p, M::log(p, q)};
}

template <class M>
typename M::Point geodesic(const typename M::Point& p, const typename M::Point& q, double t) {
  return M::geodesic(p, q, t);
}

template <class M>
Tangent<M> transport(const typename M::Point& p, const typename M::Point& q, const Tangent<M>& x) {
  check_anchor(p, x, "transport");
  return {q, M::transport(p, q, x.value)};
}

/// Parallel transport built only from exp, log and geodesics. Exact on
/// symmetric spaces, so it doubles as an oracle for the closed forms.
template <class M>
Tangent<M> pole_ladder(const typename M::Point& p, const typename M::Point& q, const Tangent<M>& x) {
  check_anchor(p, x, "pole_ladder");
  const auto mid = M::geodesic(p, q, 0.5);
  const auto tip = M::exp(p, x.value);
  const auto reflected = M::exp(tip, 2.0 * M::log(tip, mid));
  return {q, M::project(q, -M::log(q, reflected))};
}

template <class M>
OrthonormalBasis<M> onb(const typename M::Point& p) {
  return {p, M::onb(p)};
}

template <class M>
Eigen::Matrix<double, M::dim, 1> coords(const OrthonormalBasis<M>& basis, const Tangent<M>& x) {
  check_anchor(basis.anchor, x, "coords");
  Eigen::Matrix<double, M::dim, 1> c;
  for (int i = 0; i < M::dim; ++i) c[i] = M::inner(basis.anchor, basis.vectors[i], x.value);
  return c;
}

template <class M, class Derived>
Tangent<M> from_coords(const OrthonormalBasis<M>& basis, const Eigen::MatrixBase<Derived>& c) {
  typename M::Vector v = M::zero(basis.anchor);
  for (int i = 0; i < M::dim; ++i) v += c[i] * basis.vectors[i];
  return {basis.anchor, v};
}

template <class M>
Tangent<M> random_tangent(const typename M::Point& p, double stddev, std::mt19937_64& rng) {
  if (stddev < 0) throw InvalidArgument("random_tangent: stddev must be non-negative");
  const auto basis = M::onb(p);
  std::normal_distribution<double> normal(0.0, 1.0);
  typename M::Vector v = M::zero(p);
  for (int i = 0; i < M::dim; ++i) v += stddev * normal(rng) * basis[i];
  return {p, v};
}

// ---------------------------------------------------------------------------
// JSON: Sphere2 points as [x,y,z], SPD3 points as a row-major 9-array.

nlohmann::json point_to_json(const Sphere2::Point& p);
nlohmann::json point_to_json(const Spd3::Point& p);

template <class M>
typename M::Point point_from_json(const nlohmann::json& j);

}  // namespace pdrssn
