// Backend-neutral mixed-integer convex program builder and solve contract.
// Objective: linear terms plus an optional convex diagonal quadratic
// (coef * var^2, coef >= 0), minimized. Complementarity pairs are encoded
// with one binary and instance-derived big-M bounds.
#ifndef CBSIM_OPTPROG_HPP
#define CBSIM_OPTPROG_HPP

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace cbsim::opt {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };
enum class Rel { Le, Eq, Ge };

enum class Status { Optimal, Infeasible, Unbounded, Limit };

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

struct Constraint {
  std::vector<LinTerm> terms;
  Rel rel = Rel::Eq;
  double rhs = 0.0;
  std::string name;
};

struct Variable {
  std::string name;
  double lo = 0.0;
  double hi = kInf;
  VarKind kind = VarKind::Continuous;
};

// Quadratic solve mode: Native evaluates coef*v^2 exactly inside the
// relaxation solver; Piecewise replaces each term with the K-segment
// secant overestimator (a max of K affine functions), so a pure-LP
// relaxation suffices. The secant error is at most coef*((hi-lo)/K)^2/4
// per term.
struct QuadMode {
  enum Kind { Native, Piecewise } kind = Piecewise;
  int segments = 16;
  static QuadMode native() { return {Native, 0}; }
  static QuadMode piecewise(int k = 16) { return {Piecewise, k}; }
};

struct SolveOptions {
  QuadMode quad = QuadMode::piecewise(16);
  double mip_gap = 1e-6;       // relative
  double feas_tol = 1e-6;      // absolute on row activity
  double int_tol = 1e-6;
  long node_limit = 1000000;
  double time_limit_s = 0.0;   // 0 = none
  int ipm_max_iter = 120;
};

struct SolveStats {
  long nodes = 0;
  long ipm_iterations = 0;
};

struct Solution {
  Status status = Status::Limit;
  std::vector<double> values;  // one per Program variable
  double objective = 0.0;
  SolveStats stats;
};

class Program {
 public:
  int add_var(std::string name, double lo, double hi,
              VarKind kind = VarKind::Continuous);
  void add_constraint(std::vector<LinTerm> terms, Rel rel, double rhs,
                      std::string name = "");
  void add_obj_term(int var, double coef);        // linear, accumulates
  void add_obj_quad(int var, double coef);        // coef * var^2, coef >= 0
  void add_obj_offset(double c) { obj_offset_ += c; }

  // Big-M encoding of 0 <= a  ⊥  b >= 0: introduces one binary z with
  // a <= m_a*z and b <= m_b*(1-z). Both bounds must be finite and both
  // variables continuous with lower bound 0. Returns the binary's id.
  int add_complementarity(int a, int b, double m_a, double m_b);

  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_constraints() const { return cons_.size(); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const std::vector<double>& obj_linear() const { return obj_lin_; }
  const std::vector<double>& obj_quad() const { return obj_quad_; }
  double obj_offset() const { return obj_offset_; }
  const std::vector<std::pair<int, int>>& complementarity_pairs() const {
    return compl_pairs_;
  }

  // Objective value of an assignment, quadratics evaluated exactly.
  double eval_objective(const std::vector<double>& x) const;
  // Largest absolute row violation of an assignment.
  double max_violation(const std::vector<double>& x) const;

  // Human-readable LP-format text (CPLEX dialect) for debugging.
  void write_lp(std::ostream& os) const;

 private:
  void check_var(int v) const;
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  std::vector<double> obj_lin_;
  std::vector<double> obj_quad_;
  double obj_offset_ = 0.0;
  std::vector<std::pair<int, int>> compl_pairs_;
};

// Global solve within the options' MIP gap. Infeasible/unbounded are
// reported in the status; Limit means a node/time cap was hit.
Solution solve(const Program& p, const SolveOptions& opts = {});

}  // namespace cbsim::opt

#endif  // CBSIM_OPTPROG_HPP
