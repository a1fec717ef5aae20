#include "pdrssn/tvmodel.hpp"

#include <cmath>
#include <string>

namespace pdrssn {

std::string_view to_string(TvNorm q) { return q == TvNorm::Anisotropic ? "anisotropic" : "isotropic"; }

TvNorm tv_norm_from_string(std::string_view name) {
  if (name == "anisotropic" || name == "1") return TvNorm::Anisotropic;
  if (name == "isotropic" || name == "2") return TvNorm::Isotropic;
  throw InvalidArgument("unknown TV norm '" + std::string(name) + "'");
}

template <class M>
void TvParams<M>::validate() const {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  if (!(beta >= 0.0)) throw InvalidArgument("beta must be non-negative");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (!M::is_point(base_point, 1e-10)) throw InvalidArgument("base point is not on the manifold");
}

namespace {

template <class M>
void check_same_shape(const Image<M>& a, const Image<M>& b, const char* where) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw InvalidArgument(std::string(where) + ": image shapes differ");
  }
}

// Flat index of the neighbor of pixel (i, j) in direction k.
inline int neighbor(int pixel, int k, int cols) { return k == 0 ? pixel + cols : pixel + 1; }

template <class M>
Image<M> constant_image(int rows, int cols, const typename M::Point& x) {
  return Image<M>(rows, cols, x);
}

template <class M>
double threshold(double tau, double beta) {
  return 1.0 + beta * tau;
}

}  // namespace

// ---------------------------------------------------------------------------

template <class M>
TangentGrid<M> tv_op(const Image<M>& p) {
  auto out = TangentGrid<M>::zeros(p, 2);
  for (int i = 0; i < p.rows; ++i) {
    for (int j = 0; j < p.cols; ++j) {
      const int px = i * p.cols + j;
      try {
        if (i + 1 < p.rows) out.at(px, 0) = log<M>(p.points[px], p(i + 1, j));
        if (j + 1 < p.cols) out.at(px, 1) = log<M>(p.points[px], p(i, j + 1));
      } catch (const InjectivityError& e) {
        throw InjectivityError("tv_op: pixel (" + std::to_string(i) + ", " + std::to_string(j) +
                               ") has an antipodal neighbor");
      }
    }
  }
  return out;
}

template <class M>
double tv_norm(const TangentGrid<M>& field, TvNorm q) {
  double total = 0.0;
  for (int px = 0; px < field.pixels(); ++px) {
    double row = 0.0;
    for (int k = 0; k < field.channels; ++k) {
      const double n2 = std::max(0.0, M::inner(field.at(px, k).anchor, field.at(px, k).value,
                                               field.at(px, k).value));
      if (q == TvNorm::Anisotropic) {
        total += std::sqrt(n2);
      } else {
        row += n2;
      }
    }
    if (q == TvNorm::Isotropic) total += std::sqrt(row);
  }
  return total;
}

template <class M>
double cost(const Image<M>& p, const Image<M>& h, const TvParams<M>& params) {
  check_same_shape(p, h, "cost");
  double data = 0.0;
  for (int px = 0; px < p.pixels(); ++px) {
    const double d = M::dist(p.points[px], h.points[px]);
    data += d * d;
  }
  return data / (2.0 * params.alpha) + tv_norm(tv_op(p), params.q);
}

template <class M>
DualField<M> tv_diff(const Image<M>& p, const TangentGrid<M>& v, const typename M::Point& base) {
  if (v.rows != p.rows || v.cols != p.cols || v.channels != 1) {
    throw InvalidArgument("tv_diff: tangent grid does not match the image");
  }
  auto out = DualField<M>::zeros(p.rows, p.cols, base);
  for (int px = 0; px < p.pixels(); ++px) {
    check_anchor(p.points[px], v.at(px), "tv_diff");
    for (int k = 0; k < 2; ++k) {
      if (!out.is_free(px, k)) continue;
      const int nb = neighbor(px, k, p.cols);
      const auto g = JacobiGeodesic<M>::from_points(p.points[px], p.points[nb]);
      const auto a = g.apply(JacobiKind::DLogBase, v.at(px));
      const auto b = g.apply(JacobiKind::DLogArg, v.at(nb));
      out.at(px, k) = M::project(base, M::transport(p.points[px], base, a.value + b.value));
    }
  }
  return out;
}

template <class M>
TangentGrid<M> tv_diff_adjoint(const Image<M>& p, const DualField<M>& eta) {
  if (eta.rows != p.rows || eta.cols != p.cols) {
    throw InvalidArgument("tv_diff_adjoint: dual field does not match the image");
  }
  auto out = TangentGrid<M>::zeros(p, 1);
  for (int px = 0; px < p.pixels(); ++px) {
    for (int k = 0; k < 2; ++k) {
      if (!eta.is_free(px, k)) continue;
      const int nb = neighbor(px, k, p.cols);
      const Tangent<M> t{p.points[px], M::transport(eta.base, p.points[px], eta.at(px, k))};
      const auto g = JacobiGeodesic<M>::from_points(p.points[px], p.points[nb]);
      out.at(px).value += g.adjoint(JacobiKind::DLogBase, t).value;
      out.at(nb).value += g.adjoint(JacobiKind::DLogArg, t).value;
    }
  }
  for (auto& x : out.values) x.value = M::project(x.anchor, x.value);
  return out;
}

template <class M>
Image<M> prox_data(const Image<M>& p, const Image<M>& h, double alpha, double sigma) {
  check_same_shape(p, h, "prox_data");
  const double t = sigma / (alpha + sigma);
  Image<M> out = p;
  for (int px = 0; px < p.pixels(); ++px) out.points[px] = M::geodesic(p.points[px], h.points[px], t);
  return out;
}

template <class M>
TangentGrid<M> d_prox_data(const Image<M>& p, const Image<M>& h, double alpha, double sigma,
                           const TangentGrid<M>& v) {
  check_same_shape(p, h, "d_prox_data");
  const double t = sigma / (alpha + sigma);
  TangentGrid<M> out{p.rows, p.cols, 1, {}};
  out.values.reserve(p.pixels());
  for (int px = 0; px < p.pixels(); ++px) {
    out.values.push_back(d_geodesic_start<M>(p.points[px], h.points[px], t, v.at(px)));
  }
  return out;
}

template <class M>
DualField<M> prox_dual(const DualField<M>& xi, double tau, double beta, TvNorm q) {
  const double thr = threshold<M>(tau, beta);
  DualField<M> out = DualField<M>::zeros(xi.rows, xi.cols, xi.base);
  for (int px = 0; px < xi.pixels(); ++px) {
    if (q == TvNorm::Anisotropic) {
      for (int k = 0; k < 2; ++k) {
        if (!xi.is_free(px, k)) continue;
        const auto& x = xi.at(px, k);
        const double n = std::sqrt(std::max(0.0, M::inner(xi.base, x, x)));
        double scale = n <= thr ? 1.0 / thr : 1.0 / n;
        while (n > thr && M::inner(xi.base, typename M::Vector(scale * x), typename M::Vector(scale * x)) > 1.0)
          scale = std::nextafter(scale, 0.0);
        out.at(px, k) = scale * x;
      }
    } else {
      double n2 = 0.0;
      for (int k = 0; k < 2; ++k) {
        if (xi.is_free(px, k)) n2 += M::inner(xi.base, xi.at(px, k), xi.at(px, k));
      }
      const double n = std::sqrt(std::max(0.0, n2));
      double scale = n <= thr ? 1.0 / thr : 1.0 / n;
      // Rounding can leave scale * xi one ulp outside the ball.
      auto scaled_norm2 = [&](double c) {
        double m2 = 0.0;
        for (int k = 0; k < 2; ++k) {
          if (!xi.is_free(px, k)) continue;
          const typename M::Vector y = c * xi.at(px, k);
          m2 += M::inner(xi.base, y, y);
        }
        return m2;
      };
      while (n > thr && scaled_norm2(scale) > 1.0) scale = std::nextafter(scale, 0.0);
      for (int k = 0; k < 2; ++k) {
        if (xi.is_free(px, k)) out.at(px, k) = scale * xi.at(px, k);
      }
    }
  }
  return out;
}

template <class M>
DualField<M> d_prox_dual(const DualField<M>& xi, const DualField<M>& eta, double tau, double beta,
                         TvNorm q) {
  const double thr = threshold<M>(tau, beta);
  DualField<M> out = DualField<M>::zeros(xi.rows, xi.cols, xi.base);
  const auto& b = xi.base;
  for (int px = 0; px < xi.pixels(); ++px) {
    if (q == TvNorm::Anisotropic) {
      for (int k = 0; k < 2; ++k) {
        if (!xi.is_free(px, k)) continue;
        const auto& x = xi.at(px, k);
        const auto& e = eta.at(px, k);
        const double n = std::sqrt(std::max(0.0, M::inner(b, x, x)));
        if (n <= thr) {
          out.at(px, k) = e / thr;
        } else {
          out.at(px, k) = (e - (M::inner(b, x, e) / (n * n)) * x) / n;
        }
      }
    } else {
      double n2 = 0.0;
      double dot = 0.0;
      for (int k = 0; k < 2; ++k) {
        if (!xi.is_free(px, k)) continue;
        n2 += M::inner(b, xi.at(px, k), xi.at(px, k));
        dot += M::inner(b, xi.at(px, k), eta.at(px, k));
      }
      const double n = std::sqrt(std::max(0.0, n2));
      for (int k = 0; k < 2; ++k) {
        if (!xi.is_free(px, k)) continue;
        if (n <= thr) {
          out.at(px, k) = eta.at(px, k) / thr;
        } else {
          out.at(px, k) = (eta.at(px, k) - (dot / n2) * xi.at(px, k)) / n;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

template <class M>
FieldPair<M> vector_field(const Image<M>& p, const DualField<M>& xi, const Image<M>& h,
                          const TvParams<M>& params) {
  check_same_shape(p, h, "vector_field");
  if (xi.rows != p.rows || xi.cols != p.cols) throw InvalidArgument("vector_field: dual shape mismatch");
  const auto& base = params.base_point;
  const auto m_img = constant_image<M>(p.rows, p.cols, base);
  const double t = params.sigma / (params.alpha + params.sigma);

  FieldPair<M> x;
  const auto w = tv_diff_adjoint(m_img, xi);
  x.primal = TangentGrid<M>{p.rows, p.cols, 1, {}};
  x.primal.values.reserve(p.pixels());
  auto log_p = TangentGrid<M>::zeros(m_img, 1);
  for (int px = 0; px < p.pixels(); ++px) {
    const auto& pp = p.points[px];
    const auto z = M::transport(base, pp, -params.sigma * w.at(px).value);
    const auto y = M::exp(pp, z);
    const auto f1 = M::geodesic(y, h.points[px], t);
    x.primal.values.push_back({pp, -M::log(pp, f1)});
    log_p.at(px).value = M::log(base, pp);
  }
  const auto u = tv_diff(m_img, log_p, base);
  auto arg = xi;
  for (std::size_t n = 0; n < arg.values.size(); ++n) arg.values[n] += params.tau * u.values[n];
  const auto prox = prox_dual(arg, params.tau, params.beta, params.q);
  x.dual = xi;
  for (std::size_t n = 0; n < x.dual.values.size(); ++n) x.dual.values[n] -= prox.values[n];
  return x;
}

// ---------------------------------------------------------------------------

IndexMap::IndexMap(int rows, int cols, int dim) : rows_(rows), cols_(cols), dim_(dim) {
  entry_of_.assign(std::size_t(rows) * cols * 2, -1);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      for (int k = 0; k < 2; ++k) {
        const bool free = k == 0 ? i + 1 < rows : j + 1 < cols;
        if (!free) continue;
        const int px = i * cols + j;
        entry_of_[std::size_t(px) * 2 + k] = static_cast<int>(entries_.size());
        entries_.push_back({px, k});
      }
    }
  }
}

IndexMap::Slot IndexMap::slot(int row) const {
  if (row < 0 || row >= size()) throw InvalidArgument("IndexMap: row out of range");
  Slot s;
  if (row < dim_ * pixels()) {
    s.pixel = row / dim_;
    s.coord = row % dim_;
    return s;
  }
  const int r = row - dim_ * pixels();
  const auto& e = entries_[r / dim_];
  s.dual = true;
  s.pixel = e[0];
  s.channel = e[1];
  s.coord = r % dim_;
  return s;
}

namespace {

template <class M>
using Block = Eigen::Matrix<double, M::dim, M::dim>;

template <class M>
Eigen::Matrix<double, M::dim, 1> coords_of(const typename M::Point& p,
                                           const std::array<typename M::Vector, M::dim>& basis,
                                           const typename M::Vector& v) {
  Eigen::Matrix<double, M::dim, 1> c;
  for (int i = 0; i < M::dim; ++i) c[i] = M::inner(p, basis[i], v);
  return c;
}

// Generalized derivative of the dual prox at one pixel, in onb(m̃)
// coordinates over the two channels (rows/cols of non-free channels are zero).
template <class M>
Eigen::Matrix<double, 2 * M::dim, 2 * M::dim> prox_dual_jacobian(
    const std::array<Eigen::Matrix<double, M::dim, 1>, 2>& z, const std::array<bool, 2>& free,
    double thr, TvNorm q) {
  constexpr int d = M::dim;
  Eigen::Matrix<double, 2 * d, 2 * d> j = Eigen::Matrix<double, 2 * d, 2 * d>::Zero();
  if (q == TvNorm::Anisotropic) {
    for (int k = 0; k < 2; ++k) {
      if (!free[k]) continue;
      const double n = z[k].norm();
      if (n <= thr) {
        j.template block<d, d>(k * d, k * d) = Block<M>::Identity() / thr;
      } else {
        j.template block<d, d>(k * d, k * d) =
            (Block<M>::Identity() - z[k] * z[k].transpose() / (n * n)) / n;
      }
    }
    return j;
  }
  Eigen::Matrix<double, 2 * d, 1> zz = Eigen::Matrix<double, 2 * d, 1>::Zero();
  for (int k = 0; k < 2; ++k) {
    if (free[k]) zz.template segment<d>(k * d) = z[k];
  }
  const double n = zz.norm();
  Eigen::Matrix<double, 2 * d, 2 * d> mask = Eigen::Matrix<double, 2 * d, 2 * d>::Zero();
  for (int k = 0; k < 2; ++k) {
    if (free[k]) mask.template block<d, d>(k * d, k * d).setIdentity();
  }
  if (n <= thr) return mask / thr;
  return (mask - zz * zz.transpose() / (n * n)) / n;
}

}  // namespace

template <class M>
NewtonSystem<M> newton_system(const Image<M>& p, const DualField<M>& xi, const Image<M>& h,
                              const TvParams<M>& params) {
  using Vector = typename M::Vector;
  using Geo = JacobiGeodesic<M>;
  constexpr int d = M::dim;
  check_same_shape(p, h, "newton_system");
  const auto& base = params.base_point;
  const int npix = p.pixels();
  const double sigma = params.sigma;
  const double tau = params.tau;
  const double t = sigma / (params.alpha + sigma);

  NewtonSystem<M> sys;
  sys.index_map = IndexMap(p.rows, p.cols, d);
  const IndexMap& map = sys.index_map;
  const int n = map.size();
  sys.matrix = Eigen::MatrixXd::Zero(n, n);

  const auto x = vector_field(p, xi, h, params);
  sys.rhs = -to_coords(x, map);
  sys.x_norm = field_norm(x);

  const auto bm = M::onb(base);
  const auto m_img = constant_image<M>(p.rows, p.cols, base);
  const auto w = tv_diff_adjoint(m_img, xi);

  // Difference stencil at the constant image: entry (P, k) = A v_P + B v_{P+e_k}.
  Block<M> sa, sb;
  {
    const auto g = Geo::from_points(base, base);
    for (int c = 0; c < d; ++c) {
      const Tangent<M> v{base, bm[c]};
      sa.col(c) = coords_of<M>(base, bm, M::transport(base, base, g.apply(JacobiKind::DLogBase, v).value));
      sb.col(c) = coords_of<M>(base, bm, M::transport(base, base, g.apply(JacobiKind::DLogArg, v).value));
    }
  }

  std::vector<Block<M>> mp(npix);   // d log_{m̃} p_P, onb(p_P) -> onb(m̃)
  std::vector<Block<M>> lp(npix);   // X1_P as a function of w_P, onb(m̃) -> onb(p_P)
  std::vector<Eigen::Matrix<double, d, 1>> log_c(npix);

  for (int px = 0; px < npix; ++px) {
    const auto& pp = p.points[px];
    const auto bp = M::onb(pp);
    const Vector zeta = -sigma * w.at(px).value;
    const Vector z = M::transport(base, pp, zeta);
    const auto g_exp = Geo::from_velocity(pp, {pp, z});
    const auto g_geo = Geo::from_points(g_exp.end(), h.points[px]);
    const auto f1 = g_geo.point_at(t);
    const auto g_f = Geo::from_points(pp, f1);

    // Covariant derivative of p -> transport(m̃, p, ζ), via the pole ladder.
    const auto g_mid = Geo::from_points(pp, base);
    const auto mid = g_mid.point_at(0.5);
    const auto xp = M::exp(base, zeta);
    const auto g_xm = Geo::from_points(xp, mid);
    const Vector ell = M::log(xp, mid);
    const auto g_x4 = Geo::from_velocity(xp, {xp, 2.0 * ell});
    const auto g_pq = Geo::from_points(pp, g_x4.end());

    const auto g_bp = Geo::from_points(base, pp);
    Block<M> pp_block;
    for (int c = 0; c < d; ++c) {
      const Tangent<M> v{pp, bp[c]};
      const auto dmid = g_mid.apply(JacobiKind::DGeodesicStart, v, 0.5);
      auto dl = g_xm.apply(JacobiKind::DLogArg, dmid);
      dl.value *= 2.0;
      const auto dq4 = g_x4.apply(JacobiKind::DExpArg, dl);
      Tangent<M> dz = g_pq.apply(JacobiKind::DLogBase, v);
      dz.value = -dz.value - g_pq.apply(JacobiKind::DLogArg, dq4).value;

      Tangent<M> dy = g_exp.apply(JacobiKind::DExpBase, v);
      dy.value += g_exp.apply(JacobiKind::DExpArg, dz).value;
      const auto df1 = g_geo.apply(JacobiKind::DGeodesicStart, dy, t);
      const Vector col = -g_f.apply(JacobiKind::DLogBase, v).value - g_f.apply(JacobiKind::DLogArg, df1).value;
      pp_block.col(c) = coords_of<M>(pp, bp, col);

      mp[px].col(c) = coords_of<M>(base, bm, g_bp.apply(JacobiKind::DLogArg, v).value);
    }
    for (int b = 0; b < d; ++b) {
      const Tangent<M> dz{pp, M::transport(base, pp, -sigma * bm[b])};
      const auto dy = g_exp.apply(JacobiKind::DExpArg, dz);
      const auto df1 = g_geo.apply(JacobiKind::DGeodesicStart, dy, t);
      lp[px].col(b) = coords_of<M>(pp, bp, -g_f.apply(JacobiKind::DLogArg, df1).value);
    }
    sys.matrix.template block<d, d>(map.primal_row(px, 0), map.primal_row(px, 0)) = pp_block;
    log_c[px] = coords_of<M>(base, bm, M::log(base, pp));
  }

  // Primal rows, dual columns: w_P = sum_k A^T ξ_{P,k} + sum_k B^T ξ_{P-e_k,k}.
  for (int e = 0; e < map.free_entries(); ++e) {
    const auto [px, k] = map.entry_slot(e);
    const int nb = neighbor(px, k, p.cols);
    const int col = map.dual_row(e, 0);
    sys.matrix.template block<d, d>(map.primal_row(px, 0), col) += lp[px] * sa.transpose();
    sys.matrix.template block<d, d>(map.primal_row(nb, 0), col) += lp[nb] * sb.transpose();
  }

  // Dual rows: X2 = ξ - prox(ξ + τ u), u_{P,k} = A log_P + B log_{P+e_k}.
  const double thr = 1.0 + params.beta * tau;
  for (int px = 0; px < npix; ++px) {
    std::array<bool, 2> free{};
    std::array<Eigen::Matrix<double, d, 1>, 2> z;
    for (int k = 0; k < 2; ++k) {
      free[k] = map.entry(px, k) >= 0;
      z[k].setZero();
      if (!free[k]) continue;
      const int nb = neighbor(px, k, p.cols);
      z[k] = coords_of<M>(base, bm, xi.at(px, k)) + tau * (sa * log_c[px] + sb * log_c[nb]);
    }
    if (!free[0] && !free[1]) continue;
    const auto jac = prox_dual_jacobian<M>(z, free, thr, params.q);
    for (int k = 0; k < 2; ++k) {
      if (!free[k]) continue;
      const int row = map.dual_row(map.entry(px, k), 0);
      for (int k2 = 0; k2 < 2; ++k2) {
        if (!free[k2]) continue;
        const Block<M> jk = jac.template block<d, d>(k * d, k2 * d);
        const int col = map.dual_row(map.entry(px, k2), 0);
        Block<M> dd = -jk;
        if (k == k2) dd += Block<M>::Identity();
        sys.matrix.template block<d, d>(row, col) += dd;
        const int nb = neighbor(px, k2, p.cols);
        sys.matrix.template block<d, d>(row, map.primal_row(px, 0)) += -tau * jk * sa * mp[px];
        sys.matrix.template block<d, d>(row, map.primal_row(nb, 0)) += -tau * jk * sb * mp[nb];
      }
    }
  }
  return sys;
}

template <class M>
Eigen::VectorXd to_coords(const FieldPair<M>& x, const IndexMap& map) {
  constexpr int d = M::dim;
  Eigen::VectorXd c(map.size());
  for (int px = 0; px < map.pixels(); ++px) {
    const auto& v = x.primal.at(px);
    const auto b = M::onb(v.anchor);
    c.template segment<d>(map.primal_row(px, 0)) = coords_of<M>(v.anchor, b, v.value);
  }
  const auto bm = M::onb(x.dual.base);
  for (int e = 0; e < map.free_entries(); ++e) {
    const auto [px, k] = map.entry_slot(e);
    c.template segment<d>(map.dual_row(e, 0)) = coords_of<M>(x.dual.base, bm, x.dual.at(px, k));
  }
  return c;
}

template <class M>
FieldPair<M> from_coords(const Eigen::VectorXd& c, const Image<M>& p, const typename M::Point& base,
                         const IndexMap& map) {
  constexpr int d = M::dim;
  if (c.size() != map.size()) throw InvalidArgument("from_coords: coordinate vector has wrong length");
  FieldPair<M> x;
  x.primal = TangentGrid<M>::zeros(p, 1);
  for (int px = 0; px < map.pixels(); ++px) {
    const auto b = M::onb(p.points[px]);
    auto& v = x.primal.at(px).value;
    for (int i = 0; i < d; ++i) v += c[map.primal_row(px, i)] * b[i];
  }
  x.dual = DualField<M>::zeros(p.rows, p.cols, base);
  const auto bm = M::onb(base);
  for (int e = 0; e < map.free_entries(); ++e) {
    const auto [px, k] = map.entry_slot(e);
    for (int i = 0; i < d; ++i) x.dual.at(px, k) += c[map.dual_row(e, i)] * bm[i];
  }
  return x;
}

// ---------------------------------------------------------------------------
// JSON for images

namespace {
template <class M>
nlohmann::json image_json(const Image<M>& img) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& x : img.points) pts.push_back(point_to_json(x));
  return {{"manifold", std::string(to_string(M::kind))}, {"rows", img.rows}, {"cols", img.cols},
          {"points", pts}};
}
}  // namespace

nlohmann::json image_to_json(const Image<Sphere2>& img) { return image_json(img); }
nlohmann::json image_to_json(const Image<Spd3>& img) { return image_json(img); }

template <class M>
Image<M> image_from_json(const nlohmann::json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  PowerShape{{rows, cols}}.validate();
  const auto& pts = j.at("points");
  if (!pts.is_array() || pts.size() != std::size_t(rows) * cols) {
    throw InvalidArgument("image: expected rows * cols points");
  }
  Image<M> img;
  img.rows = rows;
  img.cols = cols;
  for (const auto& x : pts) img.points.push_back(point_from_json<M>(x));
  return img;
}

#define PDRSSN_INSTANTIATE_TV(M)                                                                   \
  template struct TvParams<M>;                                                                     \
  template TangentGrid<M> tv_op<M>(const Image<M>&);                                               \
  template double tv_norm<M>(const TangentGrid<M>&, TvNorm);                                       \
  template double cost<M>(const Image<M>&, const Image<M>&, const TvParams<M>&);                   \
  template DualField<M> tv_diff<M>(const Image<M>&, const TangentGrid<M>&, const M::Point&);       \
  template TangentGrid<M> tv_diff_adjoint<M>(const Image<M>&, const DualField<M>&);                \
  template Image<M> prox_data<M>(const Image<M>&, const Image<M>&, double, double);                \
  template TangentGrid<M> d_prox_data<M>(const Image<M>&, const Image<M>&, double, double,         \
                                         const TangentGrid<M>&);                                   \
  template DualField<M> prox_dual<M>(const DualField<M>&, double, double, TvNorm);                 \
  template DualField<M> d_prox_dual<M>(const DualField<M>&, const DualField<M>&, double, double,   \
                                       TvNorm);                                                    \
  template FieldPair<M> vector_field<M>(const Image<M>&, const DualField<M>&, const Image<M>&,     \
                                        const TvParams<M>&);                                       \
  template NewtonSystem<M> newton_system<M>(const Image<M>&, const DualField<M>&, const Image<M>&, \
                                            const TvParams<M>&);                                   \
  template Eigen::VectorXd to_coords<M>(const FieldPair<M>&, const IndexMap&);                     \
  template FieldPair<M> from_coords<M>(const Eigen::VectorXd&, const Image<M>&, const M::Point&,   \
                                       const IndexMap&);                                           \
  template Image<M> image_from_json<M>(const nlohmann::json&);

PDRSSN_INSTANTIATE_TV(Sphere2)
PDRSSN_INSTANTIATE_TV(Spd3)

#undef PDRSSN_INSTANTIATE_TV

}  // namespace pdrssn
