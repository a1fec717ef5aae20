// Acceptance runner: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every failing criterion is in kKnownFailures and 1
// otherwise (a regression, or a criterion that could not be evaluated).
// --strict makes any FAIL nonzero.

#include <algorithm>
#include <cstring>
#include <iostream>
#include <set>
#include <sstream>

#include "pdrssn/experiments.hpp"
#include "properties.hpp"

#ifndef PDRSSN_CONFIG_DIR
#define PDRSSN_CONFIG_DIR "configs"
#endif

using namespace pdrssn;

namespace {

// Criteria that do not hold for this implementation; see README.
const std::set<int> kKnownFailures{2, 5};

std::filesystem::path config_dir = PDRSSN_CONFIG_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

RunReport run(const std::string& file) { return run_experiment(load_config(config_dir / file)); }

const RunRecord& need(const RunReport& r, const std::string& name) {
  const auto* rec = r.find(name);
  if (!rec) throw std::runtime_error("missing run " + name);
  return *rec;
}

int newton_iters(const RunRecord& r, double target) { return r.trace.stage_iters_to(target, Stage::Newton); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::string fmt_q(const std::vector<std::optional<double>>& q) {
  std::string s = "[";
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i) s += ", ";
    s += q[i] ? fmt(*q[i]) : "-";
  }
  return s + "]";
}

Verdict criterion1() {
  Verdict v{true, ""};
  const auto s2 = run("known_minimizer_s2.json");
  const auto& warm = need(s2, "pd_rssn_dual_warm");
  const int it = newton_iters(warm, 1e-10);
  const double d = warm.trace.empty() || !warm.trace.back().dist_ref ? 1.0 : *warm.trace.back().dist_ref;
  v.pass = warm.ok() && it >= 0 && it <= 5 && d <= 1e-8;
  v.detail = "S2 warm: " + std::to_string(it) + " it, dist " + fmt(d);

  const auto spd = run("known_minimizer_spd.json");
  bool any = false;
  for (const auto& r : spd.runs) {
    const int i = newton_iters(r, 1e-10);
    const double dd = r.trace.empty() || !r.trace.back().dist_ref ? 1.0 : *r.trace.back().dist_ref;
    any = any || (r.ok() && i >= 0 && i <= 2 && dd <= 1e-10);
    v.detail += "; SPD " + r.name + ": " + std::to_string(i) + " it, dist " + fmt(dd);
  }
  v.pass = v.pass && any;
  return v;
}

Verdict criterion2() {
  const auto s2 = run("known_minimizer_s2.json");
  const auto& cold = need(s2, "pd_rssn_cold");
  const auto n = static_cast<int>(cold.trace.only(Stage::Newton).rows.size()) - 1;
  Verdict v;
  v.pass = cold.error_kind == "Stagnation" && n <= 50;
  v.detail = "cold start: " + (cold.ok() ? std::string("no error") : cold.error_kind) + " after " +
             std::to_string(n) + " it, final eps_rel " + (cold.trace.empty() ? "-" : fmt(cold.trace.back().eps_rel));
  return v;
}

struct TailCounts {
  int newton_to_1e6 = -1, newton_tail = -1, lrcpa_tail = -1, presteps = -1;
};

TailCounts denoise_counts() {
  static std::optional<TailCounts> cache;
  if (cache) return *cache;
  const auto rep = run("denoise2d_s2.json");
  const auto& pd = need(rep, "pd_rssn");
  const auto& lr = need(rep, "lrcpa");
  TailCounts c;
  c.presteps = static_cast<int>(pd.trace.only(Stage::Prestep).rows.size());
  c.newton_to_1e6 = newton_iters(pd, 1e-6);
  const int n4 = newton_iters(pd, 1e-4);
  if (pd.ok() && c.newton_to_1e6 >= 0 && n4 >= 0) c.newton_tail = c.newton_to_1e6 - n4;
  const int l4 = lr.trace.stage_iters_to(1e-4, Stage::Lrcpa);
  const int l6 = lr.trace.stage_iters_to(1e-6, Stage::Lrcpa);
  if (l4 >= 0 && l6 >= 0) c.lrcpa_tail = l6 - l4;
  cache = c;
  return c;
}

Verdict criterion3() {
  const auto c = denoise_counts();
  Verdict v;
  v.pass = c.newton_to_1e6 >= 0 && c.newton_to_1e6 <= 25 && c.newton_tail >= 0 && c.newton_tail <= 5;
  v.detail = std::to_string(c.presteps) + " presteps, " + std::to_string(c.newton_to_1e6) +
             " Newton it to 1e-6, " + std::to_string(c.newton_tail) + " from 1e-4";
  return v;
}

Verdict criterion4() {
  const auto c = denoise_counts();
  Verdict v;
  // A zero-iteration Newton tail counts as one so the ratio is not vacuous.
  v.pass = c.newton_tail >= 0 && c.lrcpa_tail >= 3 * std::max(1, c.newton_tail);
  v.detail = "lRCPA 1e-4 -> 1e-6: " + std::to_string(c.lrcpa_tail) + " it vs Newton " +
             std::to_string(c.newton_tail);
  return v;
}

std::vector<double> defined(const std::vector<std::optional<double>>& q) {
  std::vector<double> out;
  for (const auto& x : q)
    if (x) out.push_back(*x);
  return out;
}

Verdict criterion5() {
  const auto rep = run("inexact_rates.json");
  if (rep.runs.size() != 3) throw std::runtime_error("inexact_rates.json must define three schedules");
  Verdict v{true, ""};
  const char* label[] = {"a=0", "a=1/5", "a=1/(5k)"};
  for (int i = 0; i < 3; ++i) {
    const auto& r = rep.runs[i];
    const auto q = newton_q_rates(r.trace);
    const auto d = defined(q);
    bool ok = r.ok() && !d.empty();
    if (ok && i == 0) {
      if (d.size() < 3) {
        ok = false;
      } else {
        std::vector<double> last(d.end() - 3, d.end());
        std::sort(last.begin(), last.end());
        ok = last[1] >= 1.3;
      }
    } else if (ok && i == 1) {
      ok = std::all_of(d.begin(), d.end(), [](double x) { return x >= 0.75 && x <= 1.25; });
    } else if (ok && i == 2) {
      ok = d.back() >= 1.2;
    }
    v.pass = v.pass && ok;
    if (i) v.detail += "; ";
    v.detail += std::string(label[i]) + (ok ? " ok " : " fails ") + fmt_q(q);
  }
  return v;
}

Verdict criterion6() {
  Verdict v{true, ""};
  for (const char* file : {"scaling_s2.json", "scaling_spd.json"}) {
    const auto rep = run(file);
    int lo = 1 << 30, hi = -1;
    bool ok = !rep.runs.empty();
    std::string counts;
    for (const auto& r : rep.runs) {
      const int it = newton_iters(r, 1e-6);
      ok = ok && r.ok() && it >= 0 && it <= 25;
      lo = std::min(lo, std::max(it, 1));
      hi = std::max(hi, it);
      counts += (counts.empty() ? "" : "/") + std::to_string(it);
    }
    ok = ok && hi <= 2.5 * lo;
    v.pass = v.pass && ok;
    v.detail += std::string(v.detail.empty() ? "" : "; ") + to_string(rep.manifold).data() + " " + counts;
  }
  return v;
}

Verdict criterion7() {
  Verdict v{true, ""};
  int failed = 0;
  const auto results = testing::all_properties(2024);
  for (const auto& r : results) {
    if (!r.pass()) {
      ++failed;
      v.detail += r.name + " worst " + fmt(r.worst) + " > " + fmt(r.tol) + "; ";
    }
  }
  v.pass = failed == 0;
  v.detail += std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " properties hold";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else if (std::strcmp(argv[i], "--configs") == 0 && i + 1 < argc) {
      config_dir = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--strict] [--configs DIR]\n";
      return 2;
    }
  }

  Verdict (*criteria[])() = {criterion1, criterion2, criterion3, criterion4,
                             criterion5, criterion6, criterion7};
  int unexpected = 0, failures = 0;
  for (int i = 0; i < 7; ++i) {
    const int id = i + 1;
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("not evaluated: ") + e.what()};
      ++unexpected;
    }
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail;
    if (!v.pass) {
      ++failures;
      if (kKnownFailures.count(id)) {
        std::cout << "  (known)";
      } else {
        ++unexpected;
      }
    }
    std::cout << std::endl;
  }
  std::cout << (7 - failures) << "/7 criteria pass" << std::endl;
  if (strict) return failures == 0 ? 0 : 1;
  return unexpected == 0 ? 0 : 1;
}
