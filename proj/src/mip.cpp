// Branch and bound over the relaxation solver: DFS with most-fractional
// branching, a round-and-fix incumbent heuristic, and an exact-fix polish
// of every accepted incumbent.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cbsim/optprog.hpp"
#include "solver_detail.hpp"

namespace cbsim::opt {
namespace {

using detail::RelaxBase;
using detail::RelaxResult;
using detail::RelaxStatus;

RelaxBase build_base(const Program& p, const QuadMode& quad) {
  RelaxBase base;
  const auto& vars = p.variables();
  base.n_orig = static_cast<int>(vars.size());
  base.n = base.n_orig;
  base.c0 = p.obj_offset();
  for (std::size_t i = 0; i < vars.size(); ++i) {
    base.lo.push_back(vars[i].lo);
    base.hi.push_back(vars[i].hi);
    base.c.push_back(p.obj_linear()[i]);
    base.q.push_back(p.obj_quad()[i]);
    if (vars[i].kind == VarKind::Binary)
      base.binaries.push_back(static_cast<int>(i));
  }
  for (const auto& c : p.constraints()) base.rows.push_back({c.terms, c.rel, c.rhs});

  if (quad.kind == QuadMode::Piecewise) {
    int segments = std::max(1, quad.segments);
    for (int i = 0; i < base.n_orig; ++i) {
      std::size_t si = static_cast<std::size_t>(i);
      double qc = base.q[si];
      if (qc <= 0.0) continue;
      double lo = base.lo[si], hi = base.hi[si];
      if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument(
            "piecewise quadratic needs finite bounds on " + vars[si].name);
      base.q[si] = 0.0;
      if (hi - lo < 1e-12) {
        base.c0 += qc * lo * lo;
        continue;
      }
      int t = base.n++;
      base.lo.push_back(-kInf);
      base.hi.push_back(kInf);
      base.c.push_back(1.0);
      base.q.push_back(0.0);
      double w = (hi - lo) / segments;
      for (int k = 0; k < segments; ++k) {
        double a = lo + k * w, b = lo + (k + 1) * w;
        double slope = qc * (a + b);
        double intercept = -qc * a * b;
        // t >= slope*v + intercept
        base.rows.push_back({{{t, 1.0}, {i, -slope}}, Rel::Ge, intercept});
      }
    }
  }
  return base;
}

struct Node {
  std::vector<std::pair<int, double>> fixes;  // (binary var, value)
  double bound;                               // parent LP objective
};

}  // namespace

Solution solve(const Program& p, const SolveOptions& opts) {
  Solution sol;
  if (p.num_vars() == 0) {
    sol.status = Status::Optimal;
    sol.objective = p.obj_offset();
    return sol;
  }
  RelaxBase base = build_base(p, opts.quad);
  detail::IpmOptions iopts;
  iopts.max_iter = opts.ipm_max_iter;

  auto t_start = std::chrono::steady_clock::now();
  auto out_of_time = [&]() {
    if (opts.time_limit_s <= 0) return false;
    std::chrono::duration<double> el = std::chrono::steady_clock::now() - t_start;
    return el.count() > opts.time_limit_s;
  };

  long total_iters = 0;
  auto solve_with = [&](const std::vector<std::pair<int, double>>& fixes)
      -> RelaxResult {
    std::vector<double> lo = base.lo, hi = base.hi;
    for (const auto& [var, val] : fixes) {
      lo[static_cast<std::size_t>(var)] = val;
      hi[static_cast<std::size_t>(var)] = val;
    }
    RelaxResult r = detail::solve_node(base, lo, hi, iopts);
    total_iters += r.iterations;
    return r;
  };

  auto to_solution = [&](const RelaxResult& r, Status st, long nodes) {
    sol.status = st;
    sol.objective = r.obj;
    sol.values.assign(r.x.begin(), r.x.begin() + base.n_orig);
    sol.stats.nodes = nodes;
    sol.stats.ipm_iterations = total_iters;
  };

  if (base.binaries.empty()) {
    RelaxResult r = solve_with({});
    switch (r.status) {
      case RelaxStatus::Optimal:
        to_solution(r, Status::Optimal, 1);
        break;
      case RelaxStatus::Infeasible:
        sol.status = Status::Infeasible;
        break;
      case RelaxStatus::Unbounded:
        sol.status = Status::Unbounded;
        break;
      case RelaxStatus::NumFail:
        sol.status = Status::Limit;
        break;
    }
    sol.stats.ipm_iterations = total_iters;
    sol.stats.nodes = 1;
    return sol;
  }

  auto fractionality = [&](const RelaxResult& r, int var) {
    double z = r.x[static_cast<std::size_t>(var)];
    return std::abs(z - std::round(z));
  };
  auto is_integral = [&](const RelaxResult& r) {
    for (int b : base.binaries)
      if (fractionality(r, b) > opts.int_tol) return false;
    return true;
  };
  // Fix every binary at its rounded value and re-solve: used both as the
  // incumbent heuristic and to polish integral relaxations.
  auto round_and_fix = [&](const RelaxResult& r,
                           const std::vector<std::pair<int, double>>& fixes)
      -> RelaxResult {
    std::vector<std::pair<int, double>> all = fixes;
    for (int b : base.binaries)
      all.emplace_back(b, std::round(r.x[static_cast<std::size_t>(b)]));
    return solve_with(all);
  };

  bool have_inc = false;
  RelaxResult incumbent;
  bool bound_proof = true;
  long nodes = 0;
  bool hit_limit = false;

  auto try_incumbent = [&](const RelaxResult& cand) {
    if (cand.status != RelaxStatus::Optimal) return;
    if (!have_inc || cand.obj < incumbent.obj - 1e-12 * (1.0 + std::abs(cand.obj))) {
      incumbent = cand;
      have_inc = true;
    }
  };

  std::vector<Node> stack;
  stack.push_back({{}, -kInf});

  while (!stack.empty()) {
    if (nodes >= opts.node_limit || out_of_time()) {
      hit_limit = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    double gap_tol = have_inc ? opts.mip_gap * std::max(1.0, std::abs(incumbent.obj))
                              : 0.0;
    if (have_inc && node.bound >= incumbent.obj - gap_tol) continue;

    RelaxResult r = solve_with(node.fixes);
    ++nodes;
    if (r.status == RelaxStatus::Infeasible) continue;
    if (r.status == RelaxStatus::Unbounded) {
      sol.status = Status::Unbounded;
      sol.stats.nodes = nodes;
      sol.stats.ipm_iterations = total_iters;
      return sol;
    }
    if (r.status == RelaxStatus::NumFail) {
      bound_proof = false;
      continue;
    }
    if (have_inc && r.obj >= incumbent.obj - gap_tol) continue;

    if (is_integral(r)) {
      RelaxResult polished = round_and_fix(r, node.fixes);
      try_incumbent(polished.status == RelaxStatus::Optimal ? polished : r);
      continue;
    }
    if (node.fixes.empty()) {
      // Root heuristic: most relaxations here are complementarity pairs
      // whose rounding is already feasible.
      RelaxResult h = round_and_fix(r, node.fixes);
      try_incumbent(h);
      gap_tol = have_inc ? opts.mip_gap * std::max(1.0, std::abs(incumbent.obj)) : 0.0;
      if (have_inc && r.obj >= incumbent.obj - gap_tol) continue;
    }

    int best_var = -1;
    double best_frac = opts.int_tol;
    for (int b : base.binaries) {
      bool already = false;
      for (const auto& f : node.fixes) already |= f.first == b;
      if (already) continue;
      double f = fractionality(r, b);
      if (f > best_frac) {
        best_frac = f;
        best_var = b;
      }
    }
    if (best_var < 0) continue;
    double z = r.x[static_cast<std::size_t>(best_var)];
    double preferred = std::round(z);
    Node other{node.fixes, r.obj}, pref{node.fixes, r.obj};
    other.fixes.emplace_back(best_var, 1.0 - preferred);
    pref.fixes.emplace_back(best_var, preferred);
    stack.push_back(std::move(other));
    stack.push_back(std::move(pref));  // popped first
  }

  if (!have_inc) {
    sol.status = hit_limit || !bound_proof ? Status::Limit : Status::Infeasible;
    sol.stats.nodes = nodes;
    sol.stats.ipm_iterations = total_iters;
    return sol;
  }
  to_solution(incumbent, (hit_limit || !bound_proof) ? Status::Limit : Status::Optimal,
              nodes);
  return sol;
}

}  // namespace cbsim::opt
