#pragma once

// Seeded property checks. Each returns the worst error seen over its trials;
// the unit tests assert on them and the acceptance runner prints them.

#include <algorithm>
#include <limits>
#include <string>

#include "pdrssn/experiments.hpp"
#include "support.hpp"

namespace pdrssn::testing {

struct PropertyResult {
  std::string name;
  double worst = 0.0;
  double tol = 0.0;
  int trials = 0;
  bool pass() const { return worst <= tol && std::isfinite(worst); }
};

template <class M>
std::string tag(const std::string& name) {
  return name + " [" + std::string(to_string(M::kind)) + "]";
}

template <class M>
double max_dist() {
  if constexpr (std::is_same_v<M, Sphere2>) {
    return 2.5;
  } else {
    return 3.0;
  }
}

template <class M>
double tnorm(const typename M::Point& p, const typename M::Vector& v) {
  return std::sqrt(std::max(0.0, M::inner(p, v, v)));
}

template <class M>
PropertyResult check_exp_log_roundtrip(std::uint64_t seed, int trials = 200) {
  Rng rng(seed);
  PropertyResult r{tag<M>("exp/log roundtrip"), 0.0, 1e-10, trials};
  for (int i = 0; i < trials; ++i) {
    const auto p = random_point<M>(rng);
    const auto q = random_neighbor<M>(p, max_dist<M>(), rng);
    r.worst = std::max(r.worst, M::dist(M::exp(p, M::log(p, q)), q));
    const auto x = random_tangent_of_length<M>(p, uniform(rng, 0.01, max_dist<M>()), rng);
    r.worst = std::max(r.worst, rel_err<M>(p, M::log(p, M::exp(p, x.value)), x.value));
  }
  return r;
}

template <class M>
PropertyResult check_transport_isometry(std::uint64_t seed, int trials = 200) {
  Rng rng(seed);
  PropertyResult r{tag<M>("transport isometry"), 0.0, 1e-12, trials};
  for (int i = 0; i < trials; ++i) {
    const auto p = random_point<M>(rng);
    const auto q = random_neighbor<M>(p, max_dist<M>(), rng);
    const auto x = random_tangent_of_length<M>(p, 1.0, rng);
    const auto y = random_tangent_of_length<M>(p, 1.0, rng);
    const auto px = M::transport(p, q, x.value);
    const auto py = M::transport(p, q, y.value);
    r.worst = std::max(r.worst, std::abs(M::inner(q, px, py) - M::inner(p, x.value, y.value)));
    r.worst = std::max(r.worst, std::abs(M::inner(q, px, px) - 1.0));
  }
  return r;
}

template <class M>
PropertyResult check_pole_ladder(std::uint64_t seed, int trials = 200) {
  Rng rng(seed);
  PropertyResult r{tag<M>("pole ladder vs closed-form transport"), 0.0, 1e-8, trials};
  for (int i = 0; i < trials; ++i) {
    const auto p = random_point<M>(rng);
    const auto q = random_neighbor<M>(p, 1.5, rng);
    const auto x = random_tangent_of_length<M>(p, uniform(rng, 0.05, 1.0), rng);
    const auto ladder = pole_ladder<M>(p, q, x);
    r.worst = std::max(r.worst, rel_err<M>(q, ladder.value, M::transport(p, q, x.value)));
  }
  return r;
}

// Point-valued curve derivatives are taken in the embedding (R^3 or symmetric
// matrices), where tangent vectors live as well.
template <class M>
PropertyResult check_jacobi_fd(std::uint64_t seed, int trials = 60) {
  Rng rng(seed);
  PropertyResult r{tag<M>("jacobi differentials vs central FD"), 0.0, 1e-6, trials};
  const double h = 1e-5;
  for (int i = 0; i < trials; ++i) {
    const auto p = random_point<M>(rng);
    const auto q = random_neighbor<M>(p, max_dist<M>() * 0.8, rng);
    const auto x = random_tangent_of_length<M>(p, uniform(rng, 0.05, max_dist<M>() * 0.8), rng);
    const auto v = random_tangent_of_length<M>(p, 1.0, rng);
    const auto w = random_tangent_of_length<M>(q, 1.0, rng);
    const double s = uniform(rng, 0.0, 1.0);
    const auto px = M::exp(p, x.value);

    auto fd_exp_arg = central_diff<M>([&](double t) { return M::exp(p, x.value + t * v.value); }, h);
    r.worst = std::max(r.worst, rel_err<M>(px, d_exp_arg<M>(p, x, v).value, fd_exp_arg));

    auto fd_exp_base = central_diff<M>(
        [&](double t) {
          const auto pt = M::exp(p, t * v.value);
          return M::exp(pt, M::transport(p, pt, x.value));
        },
        h);
    r.worst = std::max(r.worst, rel_err<M>(px, d_exp_base<M>(p, x, v).value, fd_exp_base));

    auto fd_log_arg = central_diff<M>([&](double t) { return M::log(p, M::exp(q, t * w.value)); }, h);
    r.worst = std::max(r.worst, rel_err<M>(p, d_log_arg<M>(p, q, w).value, fd_log_arg));

    auto fd_log_base = central_diff<M>(
        [&](double t) {
          const auto pt = M::exp(p, t * v.value);
          return M::transport(pt, p, M::log(pt, q));
        },
        h);
    r.worst = std::max(r.worst, rel_err<M>(p, d_log_base<M>(p, q, v).value, fd_log_base));

    auto fd_geo = central_diff<M>([&](double t) { return M::geodesic(M::exp(p, t * v.value), q, s); }, h);
    r.worst = std::max(r.worst, rel_err<M>(M::geodesic(p, q, s), d_geodesic_start<M>(p, q, s, v).value, fd_geo));
  }
  return r;
}

template <class M>
PropertyResult check_jacobi_adjoints(std::uint64_t seed, int trials = 100) {
  Rng rng(seed);
  PropertyResult r{tag<M>("jacobi adjoint pairings"), 0.0, 1e-10, trials};
  auto pairing = [&](const typename M::Point& in, const typename M::Point& out, const Tangent<M>& v,
                     const Tangent<M>& xi, const Tangent<M>& av, const Tangent<M>& axi) {
    const double lhs = M::inner(out, xi.value, av.value);
    const double rhs = M::inner(in, axi.value, v.value);
    return std::abs(lhs - rhs) / std::max(1.0, tnorm<M>(out, xi.value) * tnorm<M>(in, v.value));
  };
  for (int i = 0; i < trials; ++i) {
    const auto p = random_point<M>(rng);
    const auto q = random_neighbor<M>(p, max_dist<M>() * 0.8, rng);
    const auto x = random_tangent_of_length<M>(p, uniform(rng, 0.05, max_dist<M>() * 0.8), rng);
    const auto px = M::exp(p, x.value);
    const double s = uniform(rng, 0.0, 1.0);
    const auto g = M::geodesic(p, q, s);
    const auto vp = random_tangent_of_length<M>(p, 1.0, rng);
    const auto vq = random_tangent_of_length<M>(q, 1.0, rng);
    const auto xi_px = random_tangent_of_length<M>(px, 1.0, rng);
    const auto xi_p = random_tangent_of_length<M>(p, 1.0, rng);
    const auto xi_g = random_tangent_of_length<M>(g, 1.0, rng);

    r.worst = std::max(r.worst, pairing(p, px, vp, xi_px, d_exp_arg<M>(p, x, vp), d_exp_arg_adjoint<M>(p, x, xi_px)));
    r.worst = std::max(r.worst, pairing(p, px, vp, xi_px, d_exp_base<M>(p, x, vp), d_exp_base_adjoint<M>(p, x, xi_px)));
    r.worst = std::max(r.worst, pairing(q, p, vq, xi_p, d_log_arg<M>(p, q, vq), d_log_arg_adjoint<M>(p, q, xi_p)));
    r.worst = std::max(r.worst, pairing(p, p, vp, xi_p, d_log_base<M>(p, q, vp), d_log_base_adjoint<M>(p, q, xi_p)));
    r.worst = std::max(r.worst, pairing(p, g, vp, xi_g, d_geodesic_start<M>(p, q, s, vp),
                                        d_geodesic_start_adjoint<M>(p, q, s, xi_g)));
  }
  return r;
}

template <class M>
PropertyResult check_tv_pairing(std::uint64_t seed, int trials = 30) {
  Rng rng(seed);
  PropertyResult r{tag<M>("tv_diff / tv_diff_adjoint pairing"), 0.0, 1e-10, trials};
  for (int i = 0; i < trials; ++i) {
    const int rows = 1 + int(uniform(rng, 0, 8)), cols = 1 + int(uniform(rng, 0, 8));
    const auto base = random_point<M>(rng);
    const auto p = random_image<M>(rows, cols, base, 0.3, rng);
    const auto v = random_grid<M>(p, 1.0, rng);
    const auto eta = random_dual<M>(rows, cols, base, 1.0, rng);
    const double lhs = field_inner(tv_diff(p, v, base), eta);
    const double rhs = field_inner(v, tv_diff_adjoint(p, eta));
    r.worst = std::max(r.worst, std::abs(lhs - rhs) / std::max(1.0, field_norm(v) * field_norm(eta)));
  }
  return r;
}

/// Distance of the dual prox arguments to the kink of the prox at (p, ξ).
template <class M>
double kink_distance(const Image<M>& p, const DualField<M>& xi, const TvParams<M>& params) {
  const Image<M> m_img(p.rows, p.cols, params.base_point);
  auto logp = TangentGrid<M>::zeros(m_img, 1);
  for (int px = 0; px < p.pixels(); ++px) logp.at(px).value = M::log(params.base_point, p.points[px]);
  const auto arg = tv_diff(m_img, logp, params.base_point);
  const double thr = 1.0 + params.beta * params.tau;
  double best = std::numeric_limits<double>::infinity();
  for (int px = 0; px < p.pixels(); ++px) {
    double iso = 0.0;
    bool any = false;
    for (int k = 0; k < 2; ++k) {
      if (!xi.is_free(px, k)) continue;
      const typename M::Vector a = xi.at(px, k) + params.tau * arg.at(px, k);
      const double n2 = M::inner(params.base_point, a, a);
      iso += n2;
      any = true;
      if (params.q == TvNorm::Anisotropic) best = std::min(best, std::abs(std::sqrt(n2) - thr));
    }
    if (any && params.q == TvNorm::Isotropic) best = std::min(best, std::abs(std::sqrt(iso) - thr));
  }
  return best;
}

/// 4-pixel 1D problems at random points away from the prox kinks.
template <class M>
PropertyResult check_newton_fd(std::uint64_t seed, int trials = 20) {
  Rng rng(seed);
  PropertyResult r{tag<M>("newton_system vs FD Jacobian"), 0.0, 1e-5, 0};
  int attempts = 0;
  while (r.trials < trials && attempts < 50 * trials) {
    ++attempts;
    TvParams<M> params;
    params.base_point = random_point<M>(rng);
    params.alpha = uniform(rng, 0.3, 2.0);
    params.beta = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.0, 0.5);
    params.sigma = uniform(rng, 0.2, 0.6);
    params.tau = uniform(rng, 0.2, 0.6);
    params.q = r.trials % 2 ? TvNorm::Anisotropic : TvNorm::Isotropic;
    const auto h = random_image<M>(4, 1, params.base_point, 0.4, rng);
    auto p = h;
    for (auto& x : p.points) x = M::exp(x, random_tangent<M>(x, 0.1, rng).value);
    const auto xi = random_dual<M>(4, 1, params.base_point, 0.5, rng);
    if (kink_distance(p, xi, params) < 1e-3) continue;
    const auto sys = newton_system(p, xi, h, params);
    const auto fd = fd_newton_matrix(p, xi, h, params, 1e-6);
    r.worst = std::max(r.worst, column_rel_err(sys.matrix, fd));
    ++r.trials;
  }
  if (r.trials < trials) r.worst = std::numeric_limits<double>::infinity();
  return r;
}

/// Counts violations: outputs outside the dual-norm ball, and β = 0
/// projections that move under a second application.
template <class M>
PropertyResult check_prox_dual(std::uint64_t seed, int trials = 200) {
  Rng rng(seed);
  PropertyResult r{tag<M>("prox_dual ball membership and idempotence"), 0.0, 0.0, trials};
  for (int i = 0; i < trials; ++i) {
    const auto base = random_point<M>(rng);
    const int rows = 1 + int(uniform(rng, 0, 5)), cols = 1 + int(uniform(rng, 0, 5));
    const auto xi = random_dual<M>(rows, cols, base, uniform(rng, 0.1, 3.0), rng);
    const double tau = uniform(rng, 0.1, 1.0);
    for (auto q : {TvNorm::Isotropic, TvNorm::Anisotropic}) {
      const double beta = i % 2 ? 0.0 : uniform(rng, 0.0, 1.0);
      const auto out = prox_dual(xi, tau, beta, q);
      for (int px = 0; px < out.pixels(); ++px) {
        double iso = 0.0;
        for (int k = 0; k < 2; ++k) {
          if (!out.is_free(px, k)) continue;
          const double n2 = M::inner(base, out.at(px, k), out.at(px, k));
          iso += n2;
          if (q == TvNorm::Anisotropic && n2 > 1.0) r.worst += 1;
        }
        if (q == TvNorm::Isotropic && iso > 1.0) r.worst += 1;
      }
      if (beta == 0.0) {
        const auto twice = prox_dual(out, tau, 0.0, q);
        for (std::size_t n = 0; n < out.values.size(); ++n)
          if (!(twice.values[n] == out.values[n])) r.worst += 1;
      }
    }
  }
  return r;
}

/// Every logged Newton row satisfies resid_norm <= a_k * x_norm.
template <class M>
PropertyResult check_residual_bound(std::uint64_t seed, int trials = 4) {
  Rng rng(seed);
  PropertyResult r{tag<M>("IRSSN per-step residual bound"), 0.0, 0.0, 0};
  const std::vector<ResidualSchedule> schedules{
      ResidualSchedule::injected(0.2, false, seed), ResidualSchedule::injected(0.2, true, seed + 1),
      ResidualSchedule::constant_rel(0.1), ResidualSchedule::decaying_rel(0.5)};
  for (int i = 0; i < trials; ++i) {
    TvParams<M> params;
    params.base_point = random_point<M>(rng);
    params.alpha = 0.5;
    params.beta = 1e-3;
    params.sigma = params.tau = 0.35;
    const auto h = random_image<M>(6, 1, params.base_point, 0.4, rng);
    SolverConfig cfg;
    cfg.sigma = cfg.tau = 0.35;
    cfg.gamma = 0.2;
    cfg.presteps_eps = 0.1;
    cfg.warm_start = WarmStart::Presteps;
    cfg.max_iters = 30;
    cfg.eps_rel_stop = 1e-8;
    for (const auto& s : schedules) {
      SolverTrace trace;
      try {
        trace = run_pd_rssn(h, h, params, cfg, s).trace;
      } catch (const SolverFailure& e) {
        trace = e.trace();
      }
      int k = 0;
      for (const auto& row : trace.rows) {
        if (row.stage != Stage::Newton) continue;
        ++k;
        ++r.trials;
        if (row.resid_norm > s.step(k) * row.x_norm) r.worst += 1;
      }
    }
  }
  return r;
}

/// Brute-force minimization of cost() over the two geodesic parameters, by
/// grid search with shrinking windows.
template <class M>
std::pair<double, double> brute_force_deltas(const typename M::Point& p1, const typename M::Point& p2, int ell,
                                             const TvParams<M>& params) {
  const auto h = gen_piecewise_signal<M>(p1, p2, ell);
  auto f = [&](double d1, double d2) {
    return cost(gen_piecewise_signal<M>(M::geodesic(p1, p2, d1), M::geodesic(p2, p1, d2), ell), h, params);
  };
  double c1 = 0.5, c2 = 0.5, width = 1.0;
  for (int level = 0; level < 14; ++level) {
    const int n = 20;
    double best = std::numeric_limits<double>::infinity(), b1 = c1, b2 = c2;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        const double d1 = std::clamp(c1 - width / 2 + width * i / n, 0.0, 1.0);
        const double d2 = std::clamp(c2 - width / 2 + width * j / n, 0.0, 1.0);
        const double v = f(d1, d2);
        if (v < best) best = v, b1 = d1, b2 = d2;
      }
    }
    c1 = b1, c2 = b2;
    width *= 0.3;
  }
  return {c1, c2};
}

template <class M>
PropertyResult check_exact_delta(std::uint64_t seed, int trials = 6) {
  Rng rng(seed);
  PropertyResult r{tag<M>("exact minimizer delta vs brute force"), 0.0, 1e-4, trials};
  for (int i = 0; i < trials; ++i) {
    const auto p1 = random_point<M>(rng);
    const auto p2 = random_neighbor<M>(p1, max_dist<M>() * 0.8, rng);
    const int ell = 1 + int(uniform(rng, 0, 10));
    TvParams<M> params;
    params.base_point = p1;
    params.alpha = uniform(rng, 0.05, 1.5) * ell * M::dist(p1, p2);  // both branches of the clamp
    const double delta = exact_rof_delta(M::dist(p1, p2), ell, params.alpha);
    const auto [d1, d2] = brute_force_deltas<M>(p1, p2, ell, params);
    r.worst = std::max({r.worst, std::abs(d1 - delta), std::abs(d2 - delta)});
  }
  return r;
}

inline std::vector<PropertyResult> all_properties(std::uint64_t seed) {
  std::vector<PropertyResult> out;
  auto both = [&](auto&& f) {
    out.push_back(f(Sphere2{}));
    out.push_back(f(Spd3{}));
  };
  both([&](auto m) { return check_exp_log_roundtrip<decltype(m)>(seed); });
  both([&](auto m) { return check_transport_isometry<decltype(m)>(seed + 1); });
  both([&](auto m) { return check_pole_ladder<decltype(m)>(seed + 2); });
  both([&](auto m) { return check_jacobi_fd<decltype(m)>(seed + 3); });
  both([&](auto m) { return check_jacobi_adjoints<decltype(m)>(seed + 4); });
  both([&](auto m) { return check_tv_pairing<decltype(m)>(seed + 5); });
  both([&](auto m) { return check_newton_fd<decltype(m)>(seed + 6); });
  both([&](auto m) { return check_prox_dual<decltype(m)>(seed + 7); });
  both([&](auto m) { return check_residual_bound<decltype(m)>(seed + 8); });
  both([&](auto m) { return check_exact_delta<decltype(m)>(seed + 9); });
  return out;
}

}  // namespace pdrssn::testing
