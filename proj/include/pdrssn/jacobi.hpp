#pragma once

// Differentials of exp, log and geodesics on symmetric spaces.
//
// Along a geodesic with unit direction u, the curvature operator R(., u)u is
// diagonal in a parallel orthonormal frame (parallel because the curvature
// tensor is parallel on symmetric spaces). Every Jacobi field then splits into
// scalar problems per frame vector, and each differential below is "read
// coordinates in the input frame, scale by a weight, write in the output
// frame". Adjoints swap the two frames.

#include <array>

#include "pdrssn/manifolds.hpp"

namespace pdrssn {

enum class JacobiKind {
  DExpArg,        ///< D_X exp_p(X): T_p -> T_{exp_p X}
  DExpBase,       ///< D_p exp_p(X) with X carried parallel: T_p -> T_{exp_p X}
  DLogArg,        ///< D_q log_p(q): T_q -> T_p
  DLogBase,       ///< covariant derivative of r -> log_r(q) at p: T_p -> T_p
  DGeodesicStart  ///< D_p geodesic(p, q, s): T_p -> T_{geodesic(p,q,s)}
};

/// Scalar Jacobi weight for curvature eigenvalue kappa (unit-speed geodesic)
/// and geodesic length t. `s` is only used by DGeodesicStart.
double jacobi_weight(JacobiKind kind, double kappa, double t, double s = 0.0);

template <class M>
struct CurvatureFrame {
  typename M::Point anchor;
  Tangent<M> direction;
  OrthonormalBasis<M> basis;
  std::array<double, M::dim> kappas;
};

template <class M>
CurvatureFrame<M> curvature_frame(const typename M::Point& p, const Tangent<M>& direction);

/// A geodesic t -> exp_p(t X), t in [0, 1], with its curvature frame cached so
/// that many differentials along it can be applied cheaply.
template <class M>
class JacobiGeodesic {
 public:
  using Point = typename M::Point;

  /// Geodesic from p with initial velocity x (anchored at p).
  static JacobiGeodesic from_velocity(const Point& p, const Tangent<M>& x);
  /// Geodesic from p to q; the endpoint is stored as q itself.
  static JacobiGeodesic from_points(const Point& p, const Point& q);

  const Point& start() const { return start_; }
  const Point& end() const { return end_; }
  double length() const { return length_; }
  /// Point at parameter s, computed exactly as M::geodesic / M::exp would.
  Point point_at(double s) const;

  /// Apply the differential of the given kind. `s` selects the output point of
  /// DGeodesicStart.
  Tangent<M> apply(JacobiKind kind, const Tangent<M>& v, double s = 0.0) const;
  /// Adjoint of apply(): <adjoint(k, xi), v> = <xi, apply(k, v)>.
  Tangent<M> adjoint(JacobiKind kind, const Tangent<M>& xi, double s = 0.0) const;

 private:
  JacobiGeodesic() = default;
  void init_frame();
  std::array<typename M::Vector, M::dim> frame_at(double s) const;
  const Point& input_point(JacobiKind kind) const;

  Point start_;
  Point end_;
  typename M::Vector velocity_;
  bool from_points_ = false;
  double length_ = 0.0;
  RawFrame<typename M::Vector, M::dim> frame_;
  std::array<typename M::Vector, M::dim> end_frame_;
};

template <class M>
Tangent<M> d_exp_arg(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& v);
template <class M>
Tangent<M> d_exp_base(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& v);
template <class M>
Tangent<M> d_log_arg(const typename M::Point& p, const typename M::Point& q, const Tangent<M>& w);
template <class M>
Tangent<M> d_log_base(const typename M::Point& p, const typename M::Point& q, const Tangent<M>& v);
template <class M>
Tangent<M> d_geodesic_start(const typename M::Point& p, const typename M::Point& q, double t,
                            const Tangent<M>& v);

template <class M>
Tangent<M> d_exp_arg_adjoint(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& xi);
template <class M>
Tangent<M> d_exp_base_adjoint(const typename M::Point& p, const Tangent<M>& x, const Tangent<M>& xi);
template <class M>
Tangent<M> d_log_arg_adjoint(const typename M::Point& p, const typename M::Point& q,
                             const Tangent<M>& xi);
template <class M>
Tangent<M> d_log_base_adjoint(const typename M::Point& p, const typename M::Point& q,
                              const Tangent<M>& xi);
template <class M>
Tangent<M> d_geodesic_start_adjoint(const typename M::Point& p, const typename M::Point& q, double t,
                                    const Tangent<M>& xi);

}  // namespace pdrssn
