#include "pdrssn/jacobi.hpp"

#include <cmath>

namespace pdrssn {

namespace {

// Below this value of sqrt(|kappa|) * t the closed forms are replaced by their
// Taylor series in z = kappa * t^2 (removable singularities at t = 0).
constexpr double kSeriesThreshold = 1e-4;

double series_weight(JacobiKind kind, double z, double s) {
  switch (kind) {
    case JacobiKind::DExpArg:
      return 1.0 - z / 6.0 + z * z / 120.0;
    case JacobiKind::DExpBase:
      return 1.0 - z / 2.0 + z * z / 24.0;
    case JacobiKind::DLogArg:
      return 1.0 + z / 6.0 + 7.0 * z * z / 360.0;
    case JacobiKind::DLogBase:
      return -(1.0 - z / 3.0 - z * z / 45.0);
    case JacobiKind::DGeodesicStart: {
      const double u = 1.0 - s;
      return u * (1.0 + z * (1.0 - u * u) / 6.0 +
                  z * z * (7.0 / 360.0 - u * u / 36.0 + u * u * u * u / 120.0));
    }
  }
  return 0.0;
}

}  // namespace

double jacobi_weight(JacobiKind kind, double kappa, double t, double s) {
  const double z = kappa * t * t;
  const double a = std::sqrt(std::abs(z));
  if (a < kSeriesThreshold) return series_weight(kind, z, s);
  const bool positive = kappa > 0.0;
  const auto sn = [positive](double x) { return positive ? std::sin(x) : std::sinh(x); };
  const auto cs = [positive](double x) { return positive ? std::cos(x) : std::cosh(x); };
  switch (kind) {
    case JacobiKind::DExpArg:
      return sn(a) / a;
    case JacobiKind::DExpBase:
      return cs(a);
    case JacobiKind::DLogArg:
      return a / sn(a);
    case JacobiKind::DLogBase:
      return -a * cs(a) / sn(a);
    case JacobiKind::DGeodesicStart:
      return sn(a * (1.0 - s)) / sn(a);
  }
  return 0.0;
}

template <class M>
CurvatureFrame<M> curvature_frame(const typename M::Point& p, const Tangent<M>& direction) {
  check_anchor(p, direction, "curvature_frame");
  const auto raw = M::curvature_frame(p, direction.value);
  return {p, direction, {p, raw.vectors}, raw.kappas};
}

template <class M>
JacobiGeodesic<M> JacobiGeodesic<M>::from_velocity(const Point& p, const Tangent<M>& x) {
  check_anchor(p, x, "JacobiGeodesic");
  JacobiGeodesic g;
  g.start_ = p;
  g.velocity_ = x.value;
  g.end_ = M::exp(p, x.value);
  g.init_frame();
  return g;
}

template <class M>
JacobiGeodesic<M> JacobiGeodesic<M>::from_points(const Point& p, const Point& q) {
  JacobiGeodesic g;
  g.start_ = p;
  g.velocity_ = M::log(p, q);
  g.end_ = q;
  g.from_points_ = true;
  g.init_frame();
  return g;
}

template <class M>
void JacobiGeodesic<M>::init_frame() {
  length_ = std::sqrt(std::max(0.0, M::inner(start_, velocity_, velocity_)));
  frame_ = M::curvature_frame(start_, velocity_);
  for (int i = 0; i < M::dim; ++i) {
    end_frame_[i] = M::transport_along(start_, velocity_, frame_.vectors[i]);
  }
}

template <class M>
typename M::Point JacobiGeodesic<M>::point_at(double s) const {
  if (s == 0.0) return start_;
  if (s == 1.0) return end_;
  if (from_points_) return M::geodesic(start_, end_, s);
  return M::exp(start_, s * velocity_);
}

template <class M>
std::array<typename M::Vector, M::dim> JacobiGeodesic<M>::frame_at(double s) const {
  if (s == 0.0) return frame_.vectors;
  if (s == 1.0) return end_frame_;
  std::array<typename M::Vector, M::dim> out;
  const typename M::Vector partial = s * velocity_;
  for (int i = 0; i < M::dim; ++i) out[i] = M::transport_along(start_, partial, frame_.vectors[i]);
  return out;
}

template <class M>
const typename M::Point& JacobiGeodesic<M>::input_point(JacobiKind kind) const {
  return kind == JacobiKind::DLogArg ? end_ : start_;
}

template <class M>
Tangent<M> JacobiGeodesic<M>::apply(JacobiKind kind, const Tangent<M>& v, double s) const {
  const Point& in = input_point(kind);
  check_anchor(in, v, "jacobi differential");
  const auto& in_frame = kind == JacobiKind::DLogArg ? end_frame_ : frame_.vectors;
  Point out_point;
  std::array<typename M::Vector, M::dim> out_frame;
  switch (kind) {
    case JacobiKind::DExpArg:
    case JacobiKind::DExpBase:
      out_point = end_;
      out_frame = end_frame_;
      break;
    case JacobiKind::DLogArg:
    case JacobiKind::DLogBase:
      out_point = start_;
      out_frame = frame_.vectors;
      break;
    case JacobiKind::DGeodesicStart:
      out_point = point_at(s);
      out_frame = frame_at(s);
      break;
  }
  typename M::Vector result = M::zero(out_point);
  for (int i = 0; i < M::dim; ++i) {
    const double c = M::inner(in, in_frame[i], v.value);
    const double w = jacobi_weight(kind, frame_.kappas[i], length_, s);
    result += (w * c) * out_frame[i];
  }
  return {out_point, M::project(out_point, result)};
}

template <class M>
Tangent<M> JacobiGeodesic<M>::adjoint(JacobiKind kind, const Tangent<M>& xi, double s) const {
  const Point& in = input_point(kind);
  const auto& in_frame = kind == JacobiKind::DLogArg ? end_frame_ : frame_.vectors;
  Point out_point;
  std::array<typename M::Vector, M::dim> out_frame;
  switch (kind) {
    case JacobiKind::DExpArg:
    case JacobiKind::DExpBase:
      out_point = end_;
      out_frame = end_frame_;
      break;
    case JacobiKind::DLogArg:
    case JacobiKind::DLogBase:
      out_point = start_;
      out_frame = frame_.vectors;
      break;
    case JacobiKind::DGeodesicStart:
      out_point = point_at(s);
      out_frame = frame_at(s);
      break;
  }
  check_anchor(out_point, xi, "jacobi adjoint");
  typename M::Vector result = M::zero(in);
  for (int i = 0; i < M::dim; ++i) {
    const double c = M::inner(out_point, out_frame[i], xi.value);
    const double w = jacobi_weight(kind, frame_.kappas[i], length_, s);
    result += (w * c) * in_frame[i];
  }
  return {in, M::project(in, result)};
}

// ---------------------------------------------------------------------------

template <class M>
Tangent<M> d_exp_arg(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& v) {
  return JacobiGeodesic<M>::from_velocity(p, x).apply(JacobiKind::DExpArg, v);
}

template <class M>
Tangent<M> d_exp_base(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& v) {
  return JacobiGeodesic<M>::from_velocity(p, x).apply(JacobiKind::DExpBase, v);
}

template <class M>
Tangent<M> d_log_arg(const typename M::Point& p, const typename M::Point& q, const Tangent<M>& w) {
  return JacobiGeodesic<M>::from_points(p, q).apply(JacobiKind::DLogArg, w);
}

template <class M>
Tangent<M> d_log_base(const typename M::Point& p, const typename M::Point& q, const Tangent<M>& v) {
  return JacobiGeodesic<M>::from_points(p, q).apply(JacobiKind::DLogBase, v);
}

template <class M>
Tangent<M> d_geodesic_start(const typename M::Point& p, const typename M::Point& q, double t,
                            const Tangent<M>& v) {
  if (t < 0.0 || t > 1.0) throw InvalidArgument("d_geodesic_start: t must lie in [0, 1]");
  return JacobiGeodesic<M>::from_points(p, q).apply(JacobiKind::DGeodesicStart, v, t);
}

template <class M>
Tangent<M> d_exp_arg_adjoint(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& xi) {
  return JacobiGeodesic<M>::from_velocity(p, x).adjoint(JacobiKind::DExpArg, xi);
}

template <class M>
Tangent<M> d_exp_base_adjoint(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& xi) {
  return JacobiGeodesic<M>::from_velocity(p, x).adjoint(JacobiKind::DExpBase, xi);
}

template <class M>
Tangent<M> d_log_arg_adjoint(const typename M::Point& p, const typename M::Point& q,
                             const Tangent<M>& xi) {
  return JacobiGeodesic<M>::from_points(p, q).adjoint(JacobiKind::DLogArg, xi);
}

template <class M>
Tangent<M> d_log_base_adjoint(const typename M::Point& p, const typename M::Point& q,
                              const Tangent<M>& xi) {
  return JacobiGeodesic<M>::from_points(p, q).adjoint(JacobiKind::DLogBase, xi);
}

template <class M>
Tangent<M> d_geodesic_start_adjoint(const typename M::Point& p, const typename M::Point& q, double t,
                                    const Tangent<M>& xi) {
  if (t < 0.0 || t > 1.0) throw InvalidArgument("d_geodesic_start: t must lie in [0, 1]");
  return JacobiGeodesic<M>::from_points(p, q).adjoint(JacobiKind::DGeodesicStart, xi, t);
}

#define PDRSSN_INSTANTIATE_JACOBI(M)                                                               \
  template CurvatureFrame<M> curvature_frame<M>(const M::Point&, const Tangent<M>&);               \
  template class JacobiGeodesic<M>;                                                                \
  template Tangent<M> d_exp_arg<M>(const M::Point&, const Tangent<M>&, const Tangent<M>&);         \
  template Tangent<M> d_exp_base<M>(const M::Point&, const Tangent<M>&, const Tangent<M>&);        \
  template Tangent<M> d_log_arg<M>(const M::Point&, const M::Point&, const Tangent<M>&);           \
  template Tangent<M> d_log_base<M>(const M::Point&, const M::Point&, const Tangent<M>&);          \
  template Tangent<M> d_geodesic_start<M>(const M::Point&, const M::Point&, double,                \
                                          const Tangent<M>&);                                      \
  template Tangent<M> d_exp_arg_adjoint<M>(const M::Point&, const Tangent<M>&, const Tangent<M>&); \
  template Tangent<M> d_exp_base_adjoint<M>(const M::Point&, const Tangent<M>&,                    \
                                            const Tangent<M>&);                                    \
  template Tangent<M> d_log_arg_adjoint<M>(const M::Point&, const M::Point&, const Tangent<M>&);   \
  template Tangent<M> d_log_base_adjoint<M>(const M::Point&, const M::Point&, const Tangent<M>&);  \
  template Tangent<M> d_geodesic_start_adjoint<M>(const M::Point&, const M::Point&, double,        \
                                                  const Tangent<M>&);

PDRSSN_INSTANTIATE_JACOBI(Sphere2)
PDRSSN_INSTANTIATE_JACOBI(Spd3)

#undef PDRSSN_INSTANTIATE_JACOBI

}  // namespace pdrssn
