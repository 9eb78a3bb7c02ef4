// Internal solver layer behind cbsim::opt::solve(): a canonical relaxation
// model (bounds + relational rows + diagonal quadratic objective), a
// presolve, and a sparse primal-dual interior-point method. Not installed.
#ifndef CBSIM_SOLVER_DETAIL_HPP
#define CBSIM_SOLVER_DETAIL_HPP

#include <utility>
#include <vector>

#include "cbsim/optprog.hpp"

namespace cbsim::opt::detail {

struct RelRow {
  std::vector<LinTerm> terms;
  Rel rel = Rel::Eq;
  double rhs = 0.0;
};

// Relaxation base shared by all branch-and-bound nodes. Variables
// 0..n_orig-1 map one-to-one onto the caller's Program; anything past
// that (piecewise epigraph variables) is internal.
struct RelaxBase {
  int n = 0;
  int n_orig = 0;
  std::vector<double> lo, hi, c, q;
  double c0 = 0.0;
  std::vector<RelRow> rows;
  std::vector<int> binaries;
};

enum class RelaxStatus { Optimal, Infeasible, Unbounded, NumFail };

struct RelaxResult {
  RelaxStatus status = RelaxStatus::NumFail;
  std::vector<double> x;  // full-length (base.n) when Optimal
  double obj = 0.0;
  int iterations = 0;
};

struct IpmOptions {
  int max_iter = 120;
  double eps_primal = 1e-9;
  double eps_dual = 1e-9;
  double eps_gap = 1e-9;
  double delta_primal = 1e-8;
  double delta_dual = 1e-8;
};

// Presolves (fixed-variable substitution, singleton rows to bounds) and
// solves one node of the relaxation under the given bound arrays.
RelaxResult solve_node(const RelaxBase& base, const std::vector<double>& lo,
                       const std::vector<double>& hi, const IpmOptions& opts);

}  // namespace cbsim::opt::detail

#endif
