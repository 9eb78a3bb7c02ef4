#include "cbsim/optprog.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cbsim::opt {

void Program::check_var(int v) const {
  if (v < 0 || static_cast<std::size_t>(v) >= vars_.size())
    throw std::invalid_argument("undeclared variable id " + std::to_string(v));
}

int Program::add_var(std::string name, double lo, double hi, VarKind kind) {
  if (kind == VarKind::Binary) {
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
  }
  if (lo > hi) throw std::invalid_argument("variable with lo > hi: " + name);
  vars_.push_back({std::move(name), lo, hi, kind});
  obj_lin_.push_back(0.0);
  obj_quad_.push_back(0.0);
  return static_cast<int>(vars_.size()) - 1;
}

void Program::add_constraint(std::vector<LinTerm> terms, Rel rel, double rhs,
                             std::string name) {
  for (const auto& t : terms) check_var(t.var);
  cons_.push_back({std::move(terms), rel, rhs, std::move(name)});
}

void Program::add_obj_term(int var, double coef) {
  check_var(var);
  obj_lin_[static_cast<std::size_t>(var)] += coef;
}

void Program::add_obj_quad(int var, double coef) {
  check_var(var);
  if (coef < 0)
    throw std::invalid_argument("quadratic objective coefficient must be >= 0");
  obj_quad_[static_cast<std::size_t>(var)] += coef;
}

int Program::add_complementarity(int a, int b, double m_a, double m_b) {
  check_var(a);
  check_var(b);
  const Variable& va = vars_[static_cast<std::size_t>(a)];
  const Variable& vb = vars_[static_cast<std::size_t>(b)];
  if (va.kind != VarKind::Continuous || vb.kind != VarKind::Continuous)
    throw std::invalid_argument("complementarity pair must be continuous");
  if (va.lo != 0.0 || vb.lo != 0.0)
    throw std::invalid_argument("complementarity pair must have lower bound 0");
  if (!std::isfinite(m_a) || !std::isfinite(m_b) || m_a < 0 || m_b < 0)
    throw std::invalid_argument("complementarity big-M must be finite and >= 0");
  int z = add_var(va.name + "_or_" + vb.name, 0.0, 1.0, VarKind::Binary);
  add_constraint({{a, 1.0}, {z, -m_a}}, Rel::Le, 0.0);
  add_constraint({{b, 1.0}, {z, m_b}}, Rel::Le, m_b);
  compl_pairs_.emplace_back(a, b);
  return z;
}

double Program::eval_objective(const std::vector<double>& x) const {
  double v = obj_offset_;
  for (std::size_t i = 0; i < vars_.size(); ++i)
    v += obj_lin_[i] * x[i] + obj_quad_[i] * x[i] * x[i];
  return v;
}

double Program::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (const auto& c : cons_) {
    double act = 0.0;
    for (const auto& t : c.terms) act += t.coef * x[static_cast<std::size_t>(t.var)];
    double viol = 0.0;
    switch (c.rel) {
      case Rel::Le: viol = act - c.rhs; break;
      case Rel::Ge: viol = c.rhs - act; break;
      case Rel::Eq: viol = std::abs(act - c.rhs); break;
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

namespace {
std::string var_name(const Variable& v, int idx) {
  if (!v.name.empty()) return v.name;
  return "x" + std::to_string(idx);
}
void write_coef(std::ostream& os, double c, const std::string& name, bool first) {
  if (c >= 0 && !first) os << " + ";
  if (c < 0) os << (first ? "-" : " - ");
  os << std::abs(c) << " " << name;
}
}  // namespace

void Program::write_lp(std::ostream& os) const {
  os << "Minimize\n obj:";
  bool first = true;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (obj_lin_[i] != 0.0) {
      write_coef(os, obj_lin_[i], var_name(vars_[i], static_cast<int>(i)), first);
      first = false;
    }
  }
  bool any_quad = false;
  for (double q : obj_quad_) any_quad |= q != 0.0;
  if (any_quad) {
    os << (first ? " " : " + ") << "[";
    bool qfirst = true;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (obj_quad_[i] != 0.0) {
        write_coef(os, 2.0 * obj_quad_[i],
                   var_name(vars_[i], static_cast<int>(i)) + " ^ 2", qfirst);
        qfirst = false;
      }
    }
    os << " ] / 2";
    first = false;
  }
  if (first) os << " 0 " << var_name(vars_[0], 0);
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < cons_.size(); ++r) {
    const auto& c = cons_[r];
    os << " " << (c.name.empty() ? "c" + std::to_string(r) : c.name) << ":";
    bool f = true;
    for (const auto& t : c.terms) {
      write_coef(os, t.coef,
                 var_name(vars_[static_cast<std::size_t>(t.var)], t.var), f);
      f = false;
    }
    const char* rel = c.rel == Rel::Le ? "<=" : (c.rel == Rel::Ge ? ">=" : "=");
    os << " " << rel << " " << c.rhs << "\n";
  }
  os << "Bounds\n";
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    std::string n = var_name(v, static_cast<int>(i));
    if (v.lo == v.hi) {
      os << " " << n << " = " << v.lo << "\n";
    } else {
      if (std::isinf(v.lo))
        os << " -inf <= " << n;
      else
        os << " " << v.lo << " <= " << n;
      if (std::isinf(v.hi))
        os << " <= +inf\n";
      else
        os << " <= " << v.hi << "\n";
    }
  }
  bool any_bin = false;
  for (const auto& v : vars_) any_bin |= v.kind == VarKind::Binary;
  if (any_bin) {
    os << "Binaries\n";
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i].kind == VarKind::Binary)
        os << " " << var_name(vars_[i], static_cast<int>(i)) << "\n";
  }
  os << "End\n";
}

}  // namespace cbsim::opt
