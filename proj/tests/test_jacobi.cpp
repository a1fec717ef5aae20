#include <doctest.h>

#include <numbers>

#include "properties.hpp"

using namespace pdrssn;
using namespace pdrssn::testing;
using std::numbers::pi;

TEST_CASE("jacobi weights") {
  for (auto k : {JacobiKind::DExpArg, JacobiKind::DExpBase, JacobiKind::DLogArg, JacobiKind::DLogBase}) {
    const double w = jacobi_weight(k, 0.0, 0.7);
    CHECK((w == doctest::Approx(1.0) || w == doctest::Approx(-1.0)));
  }
  CHECK(jacobi_weight(JacobiKind::DGeodesicStart, 0.0, 0.7, 0.25) == doctest::Approx(0.75));
  CHECK(jacobi_weight(JacobiKind::DLogArg, 1.0, pi / 2) == doctest::Approx(pi / 2));
  CHECK(jacobi_weight(JacobiKind::DExpArg, 1.0, pi / 2) == doctest::Approx(2 / pi));
  // the small-length series joins the closed form continuously
  for (double kappa : {1.0, -0.25}) {
    for (auto k : {JacobiKind::DExpArg, JacobiKind::DExpBase, JacobiKind::DLogArg, JacobiKind::DLogBase}) {
      CHECK(jacobi_weight(k, kappa, 0.99e-4) == doctest::Approx(jacobi_weight(k, kappa, 1.01e-4)).epsilon(1e-6));
    }
  }
}

TEST_CASE_TEMPLATE("identity cases", M, Sphere2, Spd3) {
  Rng rng(2);
  const auto p = random_point<M>(rng);
  const auto v = random_tangent<M>(p, 1.0, rng);
  const auto zero = zero_tangent<M>(p);
  CHECK(rel_err<M>(p, d_exp_arg<M>(p, zero, v).value, v.value) < 1e-12);
  CHECK(rel_err<M>(p, d_exp_base<M>(p, zero, v).value, v.value) < 1e-12);
  CHECK(rel_err<M>(p, d_log_arg<M>(p, p, v).value, v.value) < 1e-12);
  CHECK(rel_err<M>(p, d_exp_arg_adjoint<M>(p, zero, v).value, v.value) < 1e-12);
  const auto q = random_neighbor<M>(p, 1.0, rng);
  CHECK(rel_err<M>(p, d_geodesic_start<M>(p, q, 0.0, v).value, v.value) < 1e-12);
  CHECK(norm(d_geodesic_start<M>(p, q, 1.0, v)) < 1e-12);
  CHECK_THROWS_AS(d_geodesic_start<M>(p, q, 1.5, v), InvalidArgument);
}

TEST_CASE("radial directions") {
  Rng rng(4);
  const auto p = random_point<Sphere2>(rng);
  const auto x = random_tangent_of_length<Sphere2>(p, 1.2, rng);
  const Tangent<Sphere2> radial{p, x.value / 1.2};
  const auto out = d_exp_arg<Sphere2>(p, x, radial);
  CHECK(rel_err<Sphere2>(Sphere2::exp(p, x.value), out.value,
                         Sphere2::transport(p, Sphere2::exp(p, x.value), radial.value)) < 1e-12);
  // q = exp(p, tV) with small t: DLogBase is -V
  const auto q = Sphere2::exp(p, 1e-3 * radial.value);
  CHECK(rel_err<Sphere2>(p, d_log_base<Sphere2>(p, q, radial).value, -radial.value) < 1e-6);
}

TEST_CASE("DLogArg at quarter distance scales normal directions by pi/2") {
  const Eigen::Vector3d p = Eigen::Vector3d::UnitX(), q = Eigen::Vector3d::UnitY();
  const Tangent<Sphere2> w{q, Eigen::Vector3d::UnitZ()};
  CHECK(norm(d_log_arg<Sphere2>(p, q, w)) == doctest::Approx(pi / 2));
}

TEST_CASE_TEMPLATE("linearity", M, Sphere2, Spd3) {
  Rng rng(6);
  const auto p = random_point<M>(rng);
  const auto q = random_neighbor<M>(p, 1.5, rng);
  const auto x = random_tangent<M>(p, 0.8, rng);
  const auto v = random_tangent<M>(p, 1.0, rng), w = random_tangent<M>(p, 1.0, rng);
  const Tangent<M> comb{p, 2.0 * v.value - 3.0 * w.value};
  const auto lhs = d_exp_base<M>(p, x, comb).value;
  const auto rhs = (2.0 * d_exp_base<M>(p, x, v).value - 3.0 * d_exp_base<M>(p, x, w).value).eval();
  CHECK(rel_err<M>(M::exp(p, x.value), lhs, rhs) < 1e-12);
  const auto lb = d_log_base<M>(p, q, comb).value;
  const auto rb = (2.0 * d_log_base<M>(p, q, v).value - 3.0 * d_log_base<M>(p, q, w).value).eval();
  CHECK(rel_err<M>(p, lb, rb) < 1e-12);
}

TEST_CASE("anchors are checked") {
  const Eigen::Vector3d p = Eigen::Vector3d::UnitX();
  const Tangent<Sphere2> wrong{Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()};
  CHECK_THROWS_AS(d_exp_arg<Sphere2>(p, wrong, wrong), AnchorError);
}

TEST_CASE("jacobi properties") {
  for (std::uint64_t seed : {11u, 12u}) {
    for (const auto& r : {check_jacobi_fd<Sphere2>(seed), check_jacobi_fd<Spd3>(seed),
                          check_jacobi_adjoints<Sphere2>(seed), check_jacobi_adjoints<Spd3>(seed)}) {
      INFO(r.name << " worst " << r.worst);
      CHECK(r.pass());
    }
  }
}
