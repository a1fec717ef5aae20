#include "pdrssn/manifolds.hpp"

#include <algorithm>
#include <cmath>

namespace pdrssn {

int manifold_dim(ManifoldKind kind) {
  return kind == ManifoldKind::Sphere2 ? Sphere2::dim : Spd3::dim;
}

std::string_view to_string(ManifoldKind kind) {
  return kind == ManifoldKind::Sphere2 ? "Sphere2" : "SPD3";
}

ManifoldKind manifold_kind_from_string(std::string_view name) {
  if (name == "Sphere2" || name == "S2") return ManifoldKind::Sphere2;
  if (name == "SPD3" || name == "P3") return ManifoldKind::SPD3;
  throw InvalidArgument("unknown manifold '" + std::string(name) + "'");
}

namespace {

// Index of the coordinate axis least aligned with v; ties go to the lowest index.
int least_aligned_axis(const Eigen::Vector3d& v) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(v[i]) < std::abs(v[best])) best = i;
  }
  return best;
}

// Unit vector orthogonal to the unit vector u.
Eigen::Vector3d orthogonal_unit(const Eigen::Vector3d& u) {
  Eigen::Vector3d e = Eigen::Vector3d::Unit(least_aligned_axis(u));
  return (e - e.dot(u) * u).normalized();
}

}  // namespace

// ---------------------------------------------------------------------------
// Sphere2

double Sphere2::inner(const Point&, const Vector& x, const Vector& y) { return x.dot(y); }

double Sphere2::dist(const Point& p, const Point& q) {
  return std::atan2(p.cross(q).norm(), p.dot(q));
}

Sphere2::Point Sphere2::exp(const Point& p, const Vector& x) {
  const double theta = x.norm();
  if (theta == 0.0) return p;
  return (std::cos(theta) * p + (std::sin(theta) / theta) * x).normalized();
}

Sphere2::Vector Sphere2::log(const Point& p, const Point& q) {
  const double c = p.dot(q);
  const double theta = std::atan2(p.cross(q).norm(), c);
  if (theta >= M_PI - antipodal_margin) {
    throw InjectivityError("Sphere2 log: points are (nearly) antipodal");
  }
  Vector v = q - c * p;
  v -= p.dot(v) * p;
  const double n = v.norm();
  if (n == 0.0) return Vector::Zero();
  return (theta / n) * v;
}

Sphere2::Point Sphere2::geodesic(const Point& p, const Point& q, double t) {
  if (t == 0.0) return p;
  if (t == 1.0) return q;
  return exp(p, t * log(p, q));
}

Sphere2::Vector Sphere2::transport(const Point& p, const Point& q, const Vector& x) {
  if (p == q) return x;
  const Vector y = transport_along(p, log(p, q), x);
  return y - q.dot(y) * q;
}

Sphere2::Vector Sphere2::transport_along(const Point& p, const Vector& x, const Vector& v) {
  const double d = x.norm();
  if (d == 0.0) return v;
  const Vector u = x / d;
  // The component along the geodesic rotates with it, the normal one is fixed.
  const double a = u.dot(v);
  return v + a * ((std::cos(d) - 1.0) * u - std::sin(d) * p);
}

std::array<Sphere2::Vector, 2> Sphere2::onb(const Point& p) {
  const Vector b0 = orthogonal_unit(p);
  return {b0, p.cross(b0)};
}

RawFrame<Sphere2::Vector, 2> Sphere2::curvature_frame(const Point& p, const Vector& direction) {
  RawFrame<Vector, 2> frame;
  const double n = direction.norm();
  if (n == 0.0) {
    frame.vectors = onb(p);
  } else {
    const Vector u = direction / n;
    frame.vectors = {u, p.cross(u)};
  }
  frame.kappas = {0.0, 1.0};
  return frame;
}

bool Sphere2::is_point(const Point& p, double tol) {
  return p.allFinite() && std::abs(p.norm() - 1.0) <= tol;
}

bool Sphere2::is_tangent(const Point& p, const Vector& x, double tol) {
  return x.allFinite() && std::abs(p.dot(x)) <= tol * std::max(1.0, x.norm());
}

bool Sphere2::same_point(const Point& p, const Point& q, double tol) {
  return (p - q).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// SPD3 matrix functions

namespace spd {

namespace {
template <class F>
Eigen::Matrix3d apply_sym(const Eigen::Matrix3d& a, F f) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (a + a.transpose()));
  Eigen::Vector3d lam = es.eigenvalues().unaryExpr(f);
  Eigen::Matrix3d r = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}
}  // namespace

Eigen::Matrix3d sqrtm(const Eigen::Matrix3d& a) {
  return apply_sym(a, [](double l) { return std::sqrt(l); });
}
Eigen::Matrix3d invsqrtm(const Eigen::Matrix3d& a) {
  return apply_sym(a, [](double l) { return 1.0 / std::sqrt(l); });
}
Eigen::Matrix3d expm(const Eigen::Matrix3d& a) {
  return apply_sym(a, [](double l) { return std::exp(l); });
}
Eigen::Matrix3d logm(const Eigen::Matrix3d& a) {
  return apply_sym(a, [](double l) { return std::log(l); });
}
Eigen::Matrix3d powm(const Eigen::Matrix3d& a, double t) {
  return apply_sym(a, [t](double l) { return std::pow(l, t); });
}

}  // namespace spd

namespace {

Eigen::Matrix3d sym(const Eigen::Matrix3d& a) { return 0.5 * (a + a.transpose()); }

// p = s s with s = p^{1/2}; returns (s, s^{-1}).
std::pair<Eigen::Matrix3d, Eigen::Matrix3d> half_powers(const Eigen::Matrix3d& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym(p));
  const Eigen::Vector3d r = es.eigenvalues().cwiseSqrt();
  const Eigen::Matrix3d& v = es.eigenvectors();
  return {sym(v * r.asDiagonal() * v.transpose()),
          sym(v * r.cwiseInverse().asDiagonal() * v.transpose())};
}

// Canonical orthonormal basis of the symmetric matrices under the trace metric.
std::array<Eigen::Matrix3d, 6> identity_basis() {
  std::array<Eigen::Matrix3d, 6> b;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 3; ++i) {
    b[i].setZero();
    b[i](i, i) = 1.0;
  }
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < 3; ++k) {
    b[3 + k].setZero();
    b[3 + k](pairs[k][0], pairs[k][1]) = r;
    b[3 + k](pairs[k][1], pairs[k][0]) = r;
  }
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Spd3

double Spd3::inner(const Point& p, const Vector& x, const Vector& y) {
  Eigen::LLT<Eigen::Matrix3d> llt(p);
  const Eigen::Matrix3d a = llt.solve(x);
  const Eigen::Matrix3d b = llt.solve(y);
  return (a.cwiseProduct(b.transpose())).sum();
}

double Spd3::dist(const Point& p, const Point& q) {
  const auto [s, si] = half_powers(p);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym(si * q * si), Eigen::EigenvaluesOnly);
  return es.eigenvalues().array().log().matrix().norm();
}

Spd3::Point Spd3::exp(const Point& p, const Vector& x) {
  const auto [s, si] = half_powers(p);
  return sym(s * spd::expm(si * x * si) * s);
}

Spd3::Vector Spd3::log(const Point& p, const Point& q) {
  const auto [s, si] = half_powers(p);
  return sym(s * spd::logm(si * q * si) * s);
}

Spd3::Point Spd3::geodesic(const Point& p, const Point& q, double t) {
  if (t == 0.0) return p;
  if (t == 1.0) return q;
  return exp(p, t * log(p, q));
}

Spd3::Vector Spd3::transport(const Point& p, const Point& q, const Vector& x) {
  const auto [s, si] = half_powers(p);
  const Eigen::Matrix3d e = s * spd::sqrtm(si * q * si) * si;
  return sym(e * x * e.transpose());
}

Spd3::Vector Spd3::transport_along(const Point& p, const Vector& x, const Vector& v) {
  const auto [s, si] = half_powers(p);
  const Eigen::Matrix3d e = s * spd::expm(0.5 * si * x * si) * si;
  return sym(e * v * e.transpose());
}

std::array<Spd3::Vector, 6> Spd3::onb(const Point& p) {
  const auto [s, si] = half_powers(p);
  auto b = identity_basis();
  for (auto& v : b) v = sym(s * v * s);
  return b;
}

RawFrame<Spd3::Vector, 6> Spd3::curvature_frame(const Point& p, const Vector& direction) {
  RawFrame<Vector, 6> frame;
  const auto [s, si] = half_powers(p);
  const Eigen::Matrix3d a = sym(si * direction * si);
  const double n = a.norm();
  if (n == 0.0) {
    frame.vectors = onb(p);
    frame.kappas.fill(0.0);
    return frame;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a / n);
  const Eigen::Vector3d lam = es.eigenvalues();
  const Eigen::Matrix3d& v = es.eigenvectors();
  // The flat directions are the matrices diagonal in the eigenbasis; choose
  // their basis so that the first element is the direction itself.
  const Eigen::Vector3d d0 = lam;
  const Eigen::Vector3d d1 = orthogonal_unit(d0);
  const Eigen::Vector3d d2 = d0.cross(d1);
  const Eigen::Vector3d diag[3] = {d0, d1, d2};
  for (int r = 0; r < 3; ++r) {
    frame.vectors[r] = sym(s * v * diag[r].asDiagonal() * v.transpose() * s);
    frame.kappas[r] = 0.0;
  }
  const double h = 1.0 / std::sqrt(2.0);
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int k = 0; k < 3; ++k) {
    const int i = pairs[k][0];
    const int j = pairs[k][1];
    Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
    e(i, j) = h;
    e(j, i) = h;
    frame.vectors[3 + k] = sym(s * v * e * v.transpose() * s);
    const double gap = lam[i] - lam[j];
    frame.kappas[3 + k] = -0.25 * gap * gap;
  }
  return frame;
}

bool Spd3::is_point(const Point& p, double tol) {
  if (!p.allFinite()) return false;
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, p.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym(p), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

bool Spd3::is_tangent(const Point&, const Vector& x, double tol) {
  return x.allFinite() &&
         (x - x.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, x.cwiseAbs().maxCoeff());
}

bool Spd3::same_point(const Point& p, const Point& q, double tol) {
  return (p - q).cwiseAbs().maxCoeff() <= tol * std::max(1.0, p.cwiseAbs().maxCoeff());
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json point_to_json(const Sphere2::Point& p) { return {p[0], p[1], p[2]}; }

nlohmann::json point_to_json(const Spd3::Point& p) {
  nlohmann::json j = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j.push_back(p(r, c));
  return j;
}

template <>
Sphere2::Point point_from_json<Sphere2>(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("Sphere2 point must be a 3-array");
  Sphere2::Point p(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  if (!p.allFinite() || p.norm() == 0.0) throw InvalidArgument("Sphere2 point must be finite and nonzero");
  // Accept slightly off-sphere input (e.g. rounded decimals) and renormalize.
  if (std::abs(p.norm() - 1.0) > 1e-6) throw InvalidArgument("Sphere2 point is not unit length");
  return p.normalized();
}

template <>
Spd3::Point point_from_json<Spd3>(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 9) throw InvalidArgument("SPD3 point must be a row-major 9-array");
  Spd3::Point p;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p(r, c) = j[3 * r + c].get<double>();
  if (!Spd3::is_point(p, 1e-9)) throw InvalidArgument("SPD3 point is not symmetric positive definite");
  return sym(p);
}

}  // namespace pdrssn
