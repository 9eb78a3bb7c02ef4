#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cbsim/optprog.hpp"

using namespace cbsim::opt;

TEST_CASE("trivial LP: minimize x subject to x >= 5") {
  Program p;
  int x = p.add_var("x", 0, kInf);
  p.add_obj_term(x, 1.0);
  p.add_constraint({{x, 1.0}}, Rel::Ge, 5.0);
  auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.values[0] == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(s.objective == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("two-variable LP with equality") {
  // minimize a+b with a-b=1, complementarity on (a,b) -> a=1, b=0
  Program p;
  int a = p.add_var("a", 0, 3);
  int b = p.add_var("b", 0, 2);
  p.add_obj_term(a, 1.0);
  p.add_obj_term(b, 1.0);
  p.add_constraint({{a, 1.0}, {b, -1.0}}, Rel::Eq, 1.0);
  p.add_complementarity(a, b, 3.0, 2.0);
  auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.values[a] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.values[b] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("complementarity forces one side at the optimum") {
  Program p;
  int a = p.add_var("a", 0, 3);
  int b = p.add_var("b", 0, 2);
  p.add_obj_term(a, -1.0);
  p.add_obj_term(b, -1.0);
  p.add_complementarity(a, b, 3.0, 2.0);
  auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  bool left = std::abs(s.values[a] - 3.0) < 1e-6 && std::abs(s.values[b]) < 1e-6;
  bool right = std::abs(s.values[a]) < 1e-6 && std::abs(s.values[b] - 2.0) < 1e-6;
  CHECK((left || right));
  CHECK(s.objective == doctest::Approx(-3.0).epsilon(1e-6));  // a=3 side is better
  CHECK(std::min(s.values[a], s.values[b]) <= 1e-6);
}

TEST_CASE("complementarity: origin stays feasible regardless of binary") {
  Program p;
  int a = p.add_var("a", 0, 3);
  int b = p.add_var("b", 0, 2);
  p.add_obj_term(a, 1.0);
  p.add_obj_term(b, 1.0);
  p.add_complementarity(a, b, 3.0, 2.0);
  auto s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(std::abs(s.values[a]) < 1e-7);
  CHECK(std::abs(s.values[b]) < 1e-7);
}

TEST_CASE("complementarity rejects infinite big-M and bad bounds") {
  Program p;
  int a = p.add_var("a", 0, kInf);
  int b = p.add_var("b", 0, 2);
  CHECK_THROWS_AS(p.add_complementarity(a, b, kInf, 2.0), std::invalid_argument);
  int c = p.add_var("c", -1, 2);
  CHECK_THROWS_AS(p.add_complementarity(c, b, 2.0, 2.0), std::invalid_argument);
}

TEST_CASE("native quadratic: minimize (x-1)^2 over [0,3]") {
  Program p;
  int x = p.add_var("x", 0, 3);
  p.add_obj_quad(x, 1.0);
  p.add_obj_term(x, -2.0);
  p.add_obj_offset(1.0);
  auto s = solve(p, {.quad = QuadMode::native()});
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.values[x] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(s.objective) < 1e-7);
}

TEST_CASE("piecewise quadratic stays within the secant error bound") {
  Program p;
  int x = p.add_var("x", 0, 3);
  p.add_obj_quad(x, 1.0);
  p.add_obj_term(x, -2.0);
  p.add_obj_offset(1.0);
  auto s = solve(p, {.quad = QuadMode::piecewise(16)});
  REQUIRE(s.status == Status::Optimal);
  double bound = std::pow(3.0 / 16.0, 2) / 4.0;
  CHECK(s.objective >= -1e-8);
  CHECK(s.objective <= bound + 1e-8);
}

TEST_CASE("infeasible and unbounded statuses propagate") {
  {
    Program p;
    int x = p.add_var("x", 0, 1);
    p.add_constraint({{x, 1.0}}, Rel::Ge, 2.0);
    CHECK(solve(p).status == Status::Infeasible);
  }
  {
    Program p;
    int x = p.add_var("x", 0, kInf);
    p.add_obj_term(x, -1.0);
    CHECK(solve(p).status == Status::Unbounded);
  }
  {
    // Unboundedness through a constrained ray, not just a free bound.
    Program p;
    int x = p.add_var("x", 0, kInf);
    int y = p.add_var("y", 0, kInf);
    p.add_obj_term(x, -1.0);
    p.add_constraint({{x, 1.0}, {y, -1.0}}, Rel::Eq, 0.0);
    CHECK(solve(p).status == Status::Unbounded);
  }
  {
    // Infeasibility that only shows up through row interaction.
    Program p;
    int x = p.add_var("x", 0, 10);
    int y = p.add_var("y", 0, 10);
    p.add_constraint({{x, 1.0}, {y, 1.0}}, Rel::Le, 1.0);
    p.add_constraint({{x, 1.0}, {y, 1.0}}, Rel::Ge, 3.0);
    CHECK(solve(p).status == Status::Infeasible);
  }
}

namespace {

struct RandomQp {
  Program prog;
  std::vector<int> vars;
  double quad_bound_sum = 0.0;  // sum of per-term secant bounds at K=16
};

RandomQp make_random_qp(std::mt19937_64& rng) {
  RandomQp out;
  std::uniform_int_distribution<int> nd(2, 10), md(1, 6);
  std::uniform_real_distribution<double> cu(-2.0, 2.0), qu(0.0, 1.5), bu(0.2, 3.0);
  int n = nd(rng), m = md(rng);
  std::vector<double> x0(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double lo = -bu(rng), hi = bu(rng);
    int v = out.prog.add_var("v" + std::to_string(i), lo, hi);
    out.vars.push_back(v);
    double q = qu(rng);
    if (q > 0.05) {
      out.prog.add_obj_quad(v, q);
      double w = (hi - lo) / 16.0;
      out.quad_bound_sum += q * w * w / 4.0;
    }
    out.prog.add_obj_term(v, cu(rng));
    std::uniform_real_distribution<double> xu(lo, hi);
    x0[static_cast<std::size_t>(i)] = xu(rng);
  }
  // Rows built around a known interior point, so the program is feasible.
  for (int r = 0; r < m; ++r) {
    std::vector<LinTerm> terms;
    double act = 0.0;
    for (int i = 0; i < n; ++i) {
      if (rng() % 2 == 0) continue;
      double a = cu(rng);
      terms.push_back({out.vars[static_cast<std::size_t>(i)], a});
      act += a * x0[static_cast<std::size_t>(i)];
    }
    if (terms.empty()) continue;
    out.prog.add_constraint(terms, Rel::Le, act + 0.1);
  }
  return out;
}

}  // namespace

TEST_CASE("piecewise vs native agree within the summed secant bound") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    RandomQp qp = make_random_qp(rng);
    auto nat = solve(qp.prog, {.quad = QuadMode::native()});
    auto pw = solve(qp.prog, {.quad = QuadMode::piecewise(16)});
    REQUIRE(nat.status == Status::Optimal);
    REQUIRE(pw.status == Status::Optimal);
    CHECK(pw.objective >= nat.objective - 1e-6 * (1.0 + std::abs(nat.objective)));
    CHECK(pw.objective <= nat.objective + qp.quad_bound_sum +
                              1e-6 * (1.0 + std::abs(nat.objective)));
  }
}

TEST_CASE("doubling objective coefficients keeps the argmin") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    RandomQp qp = make_random_qp(rng);
    auto s1 = solve(qp.prog, {.quad = QuadMode::native()});
    Program doubled = qp.prog;
    for (int v : qp.vars) {
      doubled.add_obj_term(v, qp.prog.obj_linear()[static_cast<std::size_t>(v)]);
      double q = qp.prog.obj_quad()[static_cast<std::size_t>(v)];
      if (q > 0) doubled.add_obj_quad(v, q);
    }
    auto s2 = solve(doubled, {.quad = QuadMode::native()});
    REQUIRE(s1.status == Status::Optimal);
    REQUIRE(s2.status == Status::Optimal);
    CHECK(std::abs(s2.objective - 2.0 * s1.objective) <
          1e-5 * (1.0 + std::abs(s1.objective)));
    for (int v : qp.vars) {
      // Strictly convex coordinates have a unique optimum; linear-only
      // coordinates may sit anywhere on a tied face, so only compare when
      // curvature pins them.
      if (qp.prog.obj_quad()[static_cast<std::size_t>(v)] > 0.05)
        CHECK(std::abs(s1.values[v] - s2.values[v]) < 1e-5);
    }
  }
}

TEST_CASE("complementarity pairs hold on random sign-mixed LPs") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> cu(-1.0, 1.0), mu(0.5, 4.0);
  for (int trial = 0; trial < 40; ++trial) {
    Program p;
    int n_pairs = 1 + static_cast<int>(rng() % 4);
    std::vector<std::pair<int, int>> pairs;
    for (int k = 0; k < n_pairs; ++k) {
      double ma = mu(rng), mb = mu(rng);
      int a = p.add_var("a" + std::to_string(k), 0, ma);
      int b = p.add_var("b" + std::to_string(k), 0, mb);
      p.add_obj_term(a, cu(rng));
      p.add_obj_term(b, cu(rng));
      p.add_constraint({{a, 1.0}, {b, -1.0}}, Rel::Le, mu(rng));
      p.add_complementarity(a, b, ma, mb);
      pairs.emplace_back(a, b);
    }
    auto s = solve(p);
    REQUIRE(s.status == Status::Optimal);
    for (auto [a, b] : pairs) CHECK(std::min(s.values[a], s.values[b]) <= 1e-6);
  }
}

TEST_CASE("LP export is well formed") {
  Program p;
  int x = p.add_var("x", 0, 3);
  int z = p.add_var("", 0, 1, VarKind::Binary);
  p.add_obj_term(x, 1.5);
  p.add_obj_quad(x, 0.5);
  p.add_constraint({{x, 1.0}, {z, -3.0}}, Rel::Le, 0.0, "cap");
  std::ostringstream os;
  p.write_lp(os);
  std::string lp = os.str();
  CHECK(lp.find("Minimize") != std::string::npos);
  CHECK(lp.find("Subject To") != std::string::npos);
  CHECK(lp.find("cap:") != std::string::npos);
  CHECK(lp.find("Binaries") != std::string::npos);
  CHECK(lp.find("End") != std::string::npos);
}

TEST_CASE("solution satisfies row feasibility within 1e-6") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 25; ++trial) {
    RandomQp qp = make_random_qp(rng);
    auto s = solve(qp.prog, {.quad = QuadMode::native()});
    REQUIRE(s.status == Status::Optimal);
    CHECK(qp.prog.max_violation(s.values) <= 1e-6);
  }
}
