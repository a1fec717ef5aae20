#pragma once

// Seeded generators and finite-difference oracles shared by the unit tests
// and the acceptance runner.

#include <cmath>
#include <random>

#include "pdrssn/tvmodel.hpp"

namespace pdrssn::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

template <class M>
typename M::Point random_point(Rng& rng);

template <>
inline Sphere2::Point random_point<Sphere2>(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-3);
  return v.normalized();
}

template <>
inline Spd3::Point random_point<Spd3>(Rng& rng) {
  std::normal_distribution<double> n(0.0, 0.6);
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = n(rng);
  return Spd3::exp(Eigen::Matrix3d::Identity(), 0.5 * (a + a.transpose()));
}

/// Tangent vector at p with metric norm exactly `len`.
template <class M>
Tangent<M> random_tangent_of_length(const typename M::Point& p, double len, Rng& rng) {
  auto v = random_tangent<M>(p, 1.0, rng);
  const double n = norm(v);
  v.value *= len / n;
  return v;
}

/// A second point at distance uniform in (0.05, max_dist).
template <class M>
typename M::Point random_neighbor(const typename M::Point& p, double max_dist, Rng& rng) {
  return M::exp(p, random_tangent_of_length<M>(p, uniform(rng, 0.05, max_dist), rng).value);
}

/// Relative error measured in the metric at p.
template <class M>
double rel_err(const typename M::Point& p, const typename M::Vector& approx,
               const typename M::Vector& exact) {
  const typename M::Vector diff = approx - exact;
  const double e = std::sqrt(std::max(0.0, M::inner(p, diff, diff)));
  const double s = std::sqrt(std::max(0.0, M::inner(p, exact, exact)));
  return e / std::max(s, 1e-12);
}

/// Central difference of a curve of points through c(0).
template <class M, class F>
typename M::Vector central_diff(F curve, double h) {
  return (curve(h) - curve(-h)) / (2.0 * h);
}

template <class M>
Image<M> random_image(int rows, int cols, const typename M::Point& center, double spread, Rng& rng) {
  Image<M> img(rows, cols, center);
  for (auto& x : img.points) x = M::exp(center, random_tangent<M>(center, spread, rng).value);
  return img;
}

template <class M>
DualField<M> random_dual(int rows, int cols, const typename M::Point& base, double stddev, Rng& rng) {
  auto f = DualField<M>::zeros(rows, cols, base);
  for (int px = 0; px < f.pixels(); ++px)
    for (int k = 0; k < 2; ++k)
      if (f.is_free(px, k)) f.at(px, k) = random_tangent<M>(base, stddev, rng).value;
  return f;
}

template <class M>
TangentGrid<M> random_grid(const Image<M>& p, double stddev, Rng& rng) {
  auto g = TangentGrid<M>::zeros(p, 1);
  for (int px = 0; px < p.pixels(); ++px) g.at(px) = random_tangent<M>(p.points[px], stddev, rng);
  return g;
}

/// Finite-difference Jacobian of the coordinate map of X. Primal columns move
/// one pixel along exp and carry its X value back by parallel transport, so
/// the result approximates the covariant derivative.
template <class M>
Eigen::MatrixXd fd_newton_matrix(const Image<M>& p, const DualField<M>& xi, const Image<M>& h,
                                 const TvParams<M>& params, double step) {
  constexpr int d = M::dim;
  const IndexMap map(p.rows, p.cols, d);
  Eigen::MatrixXd jac(map.size(), map.size());
  const auto bm = M::onb(params.base_point);
  auto coords_at = [&](const Image<M>& pp, const DualField<M>& xx, int moved) {
    auto x = vector_field(pp, xx, h, params);
    if (moved >= 0) {
      auto& v = x.primal.at(moved);
      v = {p.points[moved], M::transport(pp.points[moved], p.points[moved], v.value)};
    }
    return to_coords(x, map);
  };
  for (int px = 0; px < p.pixels(); ++px) {
    const auto b = M::onb(p.points[px]);
    for (int c = 0; c < d; ++c) {
      Image<M> plus = p, minus = p;
      plus.points[px] = M::exp(p.points[px], step * b[c]);
      minus.points[px] = M::exp(p.points[px], -step * b[c]);
      jac.col(map.primal_row(px, c)) = (coords_at(plus, xi, px) - coords_at(minus, xi, px)) / (2 * step);
    }
  }
  for (int e = 0; e < map.free_entries(); ++e) {
    const auto [px, k] = map.entry_slot(e);
    for (int c = 0; c < d; ++c) {
      DualField<M> plus = xi, minus = xi;
      plus.at(px, k) += step * bm[c];
      minus.at(px, k) -= step * bm[c];
      jac.col(map.dual_row(e, c)) = (coords_at(p, plus, -1) - coords_at(p, minus, -1)) / (2 * step);
    }
  }
  return jac;
}

/// Largest column error of the Newton matrix against the FD Jacobian,
/// relative to max(1, column norm).
inline double column_rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& fd) {
  double worst = 0.0;
  for (int c = 0; c < a.cols(); ++c) {
    const double e = (a.col(c) - fd.col(c)).norm() / std::max(1.0, a.col(c).norm());
    worst = std::max(worst, e);
  }
  return worst;
}

}  // namespace pdrssn::testing
