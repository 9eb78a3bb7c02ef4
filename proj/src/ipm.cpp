// Relaxation solver: presolve + Mehrotra predictor-corrector interior point
#include <cstdio>
#include <cstdlib>
// on the regularized KKT system  [[Q+D+dp, A'],[A, -dd]], factored with
// Eigen's sparse LDL^T. Handles diagonal-quadratic objectives natively.
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "solver_detail.hpp"

namespace cbsim::opt::detail {
namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vec = Eigen::VectorXd;

constexpr double kHuge = 1e13;

struct Presolved {
  bool infeasible = false;
  std::vector<int> live;             // reduced -> base index
  std::vector<double> lo, hi, c, q;  // reduced arrays
  double c0 = 0.0;
  std::vector<RelRow> rows;          // terms use reduced ids
  std::vector<char> fixed;           // per base var
  std::vector<double> fixval;        // per base var, valid where fixed
};

double bound_tol(double lo, double hi) {
  return 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
}

// Fixed-variable substitution and singleton-row-to-bound reduction,
// iterated to a fixed point.
Presolved presolve(const RelaxBase& base, std::vector<double> lo,
                   std::vector<double> hi) {
  Presolved out;
  const int n = base.n;
  out.fixed.assign(static_cast<std::size_t>(n), 0);
  out.fixval.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<char> row_dead(base.rows.size(), 0);

  // Merge duplicate terms per row up front.
  std::vector<RelRow> rows = base.rows;
  for (auto& r : rows) {
    std::sort(r.terms.begin(), r.terms.end(),
              [](const LinTerm& a, const LinTerm& b) { return a.var < b.var; });
    std::size_t w = 0;
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
      if (w > 0 && r.terms[w - 1].var == r.terms[i].var) {
        r.terms[w - 1].coef += r.terms[i].coef;
      } else {
        r.terms[w++] = r.terms[i];
      }
    }
    r.terms.resize(w);
  }

  bool changed = true;
  int pass = 0;
  while (changed && pass++ < 50) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      std::size_t sv = static_cast<std::size_t>(v);
      if (out.fixed[sv]) continue;
      if (lo[sv] > hi[sv] + bound_tol(lo[sv], hi[sv])) {
        out.infeasible = true;
        return out;
      }
      if (std::isfinite(lo[sv]) && std::isfinite(hi[sv]) &&
          hi[sv] - lo[sv] <=
              1e-11 * std::max({1.0, std::abs(lo[sv]), std::abs(hi[sv])})) {
        out.fixed[sv] = 1;
        out.fixval[sv] = 0.5 * (lo[sv] + hi[sv]);
        changed = true;
      }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (row_dead[r]) continue;
      double rhs = rows[r].rhs;
      const LinTerm* single = nullptr;
      int live_terms = 0;
      for (const auto& t : rows[r].terms) {
        std::size_t sv = static_cast<std::size_t>(t.var);
        if (out.fixed[sv]) {
          rhs -= t.coef * out.fixval[sv];
        } else if (std::abs(t.coef) > 1e-13) {
          ++live_terms;
          single = &t;
        }
      }
      if (live_terms == 0) {
        double tol = 1e-7 * std::max(1.0, std::abs(rows[r].rhs));
        bool bad = (rows[r].rel == Rel::Eq && std::abs(rhs) > tol) ||
                   (rows[r].rel == Rel::Le && rhs < -tol) ||
                   (rows[r].rel == Rel::Ge && rhs > tol);
        if (bad) {
          out.infeasible = true;
          return out;
        }
        row_dead[r] = 1;
        changed = true;
      } else if (live_terms == 1) {
        std::size_t sv = static_cast<std::size_t>(single->var);
        double bnd = rhs / single->coef;
        Rel rel = rows[r].rel;
        if (single->coef < 0 && rel != Rel::Eq)
          rel = (rel == Rel::Le) ? Rel::Ge : Rel::Le;
        if (rel == Rel::Eq || rel == Rel::Le) hi[sv] = std::min(hi[sv], bnd);
        if (rel == Rel::Eq || rel == Rel::Ge) lo[sv] = std::max(lo[sv], bnd);
        row_dead[r] = 1;
        changed = true;
      }
    }
  }

  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    std::size_t sv = static_cast<std::size_t>(v);
    if (out.fixed[sv]) {
      out.c0 += base.c[sv] * out.fixval[sv] +
                base.q[sv] * out.fixval[sv] * out.fixval[sv];
    } else {
      remap[sv] = static_cast<int>(out.live.size());
      out.live.push_back(v);
      out.lo.push_back(lo[sv]);
      out.hi.push_back(hi[sv]);
      out.c.push_back(base.c[sv]);
      out.q.push_back(base.q[sv]);
    }
  }
  out.c0 += base.c0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (row_dead[r]) continue;
    RelRow nr;
    nr.rel = rows[r].rel;
    nr.rhs = rows[r].rhs;
    for (const auto& t : rows[r].terms) {
      std::size_t sv = static_cast<std::size_t>(t.var);
      if (out.fixed[sv])
        nr.rhs -= t.coef * out.fixval[sv];
      else if (std::abs(t.coef) > 1e-13)
        nr.terms.push_back({remap[sv], t.coef});
    }
    out.rows.push_back(std::move(nr));
  }
  return out;
}

// Separable solve for models that presolved down to pure bounds.
RelaxResult solve_box(const Presolved& p) {
  RelaxResult res;
  res.status = RelaxStatus::Optimal;
  res.obj = p.c0;
  res.x.assign(p.live.size(), 0.0);
  for (std::size_t i = 0; i < p.live.size(); ++i) {
    double lo = p.lo[i], hi = p.hi[i], c = p.c[i], q = p.q[i];
    double x;
    if (q > 0) {
      x = std::clamp(-c / (2.0 * q), lo, hi);
    } else if (c > 0) {
      if (!std::isfinite(lo)) return {RelaxStatus::Unbounded, {}, 0.0, 0};
      x = lo;
    } else if (c < 0) {
      if (!std::isfinite(hi)) return {RelaxStatus::Unbounded, {}, 0.0, 0};
      x = hi;
    } else {
      x = std::clamp(0.0, lo, hi);
    }
    res.x[i] = x;
    res.obj += c * x + q * x * x;
  }
  return res;
}

// Equality-form model for the interior point iteration.
struct EqModel {
  int n = 0;  // reduced vars + slacks
  int m = 0;
  SpMat A;              // m x n
  Vec b, c, q, lo, hi;  // lo/hi may be +-inf
  int n_struct = 0;     // reduced (non-slack) prefix
  double cost_scale = 1.0;
  Vec col_scale;  // x_orig = col_scale .* x_scaled
};

EqModel build_eq_model(const std::vector<double>& lo, const std::vector<double>& hi,
                       const std::vector<double>& c, const std::vector<double>& q,
                       const std::vector<RelRow>& rows) {
  EqModel em;
  int nr = static_cast<int>(lo.size());
  int m = static_cast<int>(rows.size());
  int n_slack = 0;
  for (const auto& r : rows)
    if (r.rel != Rel::Eq) ++n_slack;
  em.n = nr + n_slack;
  em.m = m;
  em.n_struct = nr;
  em.b = Vec::Zero(m);
  em.c = Vec::Zero(em.n);
  em.q = Vec::Zero(em.n);
  em.lo = Vec::Constant(em.n, -kInf);
  em.hi = Vec::Constant(em.n, kInf);
  for (int i = 0; i < nr; ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    em.c[i] = c[si];
    // Model semantics are q*x^2; the IPM works with the Hessian diagonal.
    em.q[i] = 2.0 * q[si];
    em.lo[i] = lo[si];
    em.hi[i] = hi[si];
  }
  std::vector<Triplet> trips;
  int slack = nr;
  for (int r = 0; r < m; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    for (const auto& t : row.terms) trips.emplace_back(r, t.var, t.coef);
    em.b[r] = row.rhs;
    if (row.rel == Rel::Le) {
      trips.emplace_back(r, slack, 1.0);
      em.lo[slack] = 0.0;
      ++slack;
    } else if (row.rel == Rel::Ge) {
      trips.emplace_back(r, slack, -1.0);
      em.lo[slack] = 0.0;
      ++slack;
    }
  }
  em.A.resize(m, em.n);
  em.A.setFromTriplets(trips.begin(), trips.end());
  em.A.makeCompressed();
  return em;
}

// Ruiz equilibration of A plus a cost rescale; solutions map back through
// col_scale; objective values through cost_scale.
void equilibrate(EqModel& em) {
  em.col_scale = Vec::Ones(em.n);
  Vec row_scale = Vec::Ones(em.m);
  for (int pass = 0; pass < 4 && em.m > 0; ++pass) {
    Vec rmax = Vec::Zero(em.m), cmax = Vec::Zero(em.n);
    for (int k = 0; k < em.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(em.A, k); it; ++it) {
        double a = std::abs(it.value());
        rmax[it.row()] = std::max(rmax[it.row()], a);
        cmax[it.col()] = std::max(cmax[it.col()], a);
      }
    Vec rs = rmax.unaryExpr([](double v) { return v > 0 ? 1.0 / std::sqrt(v) : 1.0; });
    Vec cs = cmax.unaryExpr([](double v) { return v > 0 ? 1.0 / std::sqrt(v) : 1.0; });
    for (int k = 0; k < em.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(em.A, k); it; ++it)
        it.valueRef() *= rs[it.row()] * cs[it.col()];
    row_scale.array() *= rs.array();
    em.col_scale.array() *= cs.array();
  }
  em.b.array() *= row_scale.array();
  for (int i = 0; i < em.n; ++i) {
    double s = em.col_scale[i];
    em.c[i] *= s;
    em.q[i] *= s * s;
    if (std::isfinite(em.lo[i])) em.lo[i] /= s;
    if (std::isfinite(em.hi[i])) em.hi[i] /= s;
  }
  double cn = 0.0;
  for (int i = 0; i < em.n; ++i) cn = std::max({cn, std::abs(em.c[i]), em.q[i]});
  em.cost_scale = std::max(1.0, cn);
  em.c /= em.cost_scale;
  em.q /= em.cost_scale;
}

struct IpmOutcome {
  RelaxStatus status = RelaxStatus::NumFail;
  Vec x;
  int iterations = 0;
};

IpmOutcome run_ipm(const EqModel& em, const IpmOptions& opts) {
  const int n = em.n, m = em.m;
  IpmOutcome out;
  double dp = opts.delta_primal, dd = opts.delta_dual;

  std::vector<char> hasL(static_cast<std::size_t>(n)), hasU(static_cast<std::size_t>(n));
  int m_act = 0;
  for (int i = 0; i < n; ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    hasL[si] = std::isfinite(em.lo[i]);
    hasU[si] = std::isfinite(em.hi[i]);
    m_act += hasL[si] + hasU[si];
  }

  // KKT skeleton: lower triangle of [[H, A'],[A, -dd]].
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(n + m + em.A.nonZeros()));
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
  for (int k = 0; k < em.A.outerSize(); ++k)
    for (SpMat::InnerIterator it(em.A, k); it; ++it)
      trips.emplace_back(n + static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value());
  for (int r = 0; r < m; ++r) trips.emplace_back(n + r, n + r, -dd);
  SpMat K(n + m, n + m);
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();
  std::vector<std::ptrdiff_t> diag_pos(static_cast<std::size_t>(n + m), -1);
  for (int col = 0; col < n + m; ++col)
    for (SpMat::InnerIterator it(K, col); it; ++it)
      if (it.row() == col) {
        diag_pos[static_cast<std::size_t>(col)] = &it.valueRef() - K.valuePtr();
        break;
      }

  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  ldlt.analyzePattern(K);

  Vec x(n), v = Vec::Zero(n), w = Vec::Zero(n), zl = Vec::Zero(n), zu = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    if (hasL[si] && hasU[si])
      x[i] = 0.5 * (em.lo[i] + em.hi[i]);
    else if (hasL[si])
      x[i] = em.lo[i] + 1.0;
    else if (hasU[si])
      x[i] = em.hi[i] - 1.0;
    else
      x[i] = 0.0;
  }
  for (int i = 0; i < n; ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    if (hasL[si]) {
      v[i] = std::max(x[i] - em.lo[i], 1e-14);
      zl[i] = 1.0;
    }
    if (hasU[si]) {
      w[i] = std::max(em.hi[i] - x[i], 1e-14);
      zu[i] = 1.0;
    }
  }
  Vec y = Vec::Zero(m);

  const double bnorm = m > 0 ? em.b.lpNorm<Eigen::Infinity>() : 0.0;
  const double cnorm = em.c.lpNorm<Eigen::Infinity>();

  Vec rd(n), rp(m), r1(n + m), sol(n + m), dx(n), dy(m), dx_aff(n);
  Vec dzl = Vec::Zero(n), dzu = Vec::Zero(n);
  Vec rcl = Vec::Zero(n), rcu = Vec::Zero(n);
  Vec dzl_aff = Vec::Zero(n), dzu_aff = Vec::Zero(n);

  // Solves against the regularized factorization, then refines the step
  // toward the unregularized KKT system so the deltas do not bias the
  // converged residuals.
  auto kkt_solve = [&](const Vec& rhs, Vec& res) -> bool {
    res = ldlt.solve(rhs);
    if (!res.allFinite()) return false;
    for (int round = 0; round < 3; ++round) {
      Vec resid = rhs - K.selfadjointView<Eigen::Lower>() * res;
      resid.head(n) += dp * res.head(n);
      resid.tail(m) -= dd * res.tail(m);
      if (resid.lpNorm<Eigen::Infinity>() <=
          1e-12 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
        break;
      Vec corr = ldlt.solve(resid);
      if (!corr.allFinite()) break;
      res += corr;
    }
    return true;
  };
  auto set_diag = [&]() {
    for (int i = 0; i < n; ++i) {
      std::size_t si = static_cast<std::size_t>(i);
      double h = em.q[i] + dp;
      if (hasL[si]) h += zl[i] / std::max(v[i], 1e-14);
      if (hasU[si]) h += zu[i] / std::max(w[i], 1e-14);
      K.valuePtr()[diag_pos[si]] = h;
    }
    for (int r = 0; r < m; ++r)
      K.valuePtr()[diag_pos[static_cast<std::size_t>(n + r)]] = -dd;
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    out.iterations = iter + 1;
    Vec Qx = em.q.cwiseProduct(x);
    rd = Qx + em.c;
    if (m > 0) rd -= em.A.transpose() * y;
    rd -= zl;
    rd += zu;
    if (m > 0) rp = em.A * x - em.b;
    double mu = 0.0;
    if (m_act > 0) {
      for (int i = 0; i < n; ++i) {
        std::size_t si = static_cast<std::size_t>(i);
        if (hasL[si]) mu += v[i] * zl[i];
        if (hasU[si]) mu += w[i] * zu[i];
      }
      mu /= m_act;
    }
    double pobj = em.c.dot(x) + 0.5 * x.dot(Qx);
    double relP = (m > 0 ? rp.lpNorm<Eigen::Infinity>() : 0.0) / (1.0 + bnorm);
    double relD = rd.lpNorm<Eigen::Infinity>() / (1.0 + cnorm);
    double gap = static_cast<double>(m_act) * mu;
    double relG = gap / (1.0 + std::abs(pobj));

    static const bool trace = getenv("CBSIM_IPM_TRACE") != nullptr;
    if (trace)
      fprintf(stderr, "ipm it=%d relP=%.2e relD=%.2e relG=%.2e pobj=%.6e\n", iter,
              relP, relD, relG, pobj);
    if (relP < opts.eps_primal && relD < opts.eps_dual && relG < opts.eps_gap) {
      out.status = RelaxStatus::Optimal;
      out.x = x;
      return out;
    }
    double xnorm = x.lpNorm<Eigen::Infinity>();
    if (xnorm > kHuge) {
      double relPx = (m > 0 ? rp.lpNorm<Eigen::Infinity>() : 0.0) / (1.0 + xnorm);
      out.status = relPx < 1e-8 ? RelaxStatus::Unbounded : RelaxStatus::NumFail;
      return out;
    }
    if (pobj < -kHuge) {
      out.status = relP < 1e-6 ? RelaxStatus::Unbounded : RelaxStatus::NumFail;
      return out;
    }

    set_diag();
    ldlt.factorize(K);
    int bumps = 0;
    while (ldlt.info() != Eigen::Success && bumps < 3) {
      dp *= 100.0;
      dd *= 100.0;
      set_diag();
      ldlt.factorize(K);
      ++bumps;
    }
    if (ldlt.info() != Eigen::Success) {
      out.status = RelaxStatus::NumFail;
      return out;
    }

    auto assemble_rhs = [&]() {
      for (int i = 0; i < n; ++i) {
        std::size_t si = static_cast<std::size_t>(i);
        double val = -rd[i];
        if (hasL[si]) val += rcl[i] / std::max(v[i], 1e-14);
        if (hasU[si]) val -= rcu[i] / std::max(w[i], 1e-14);
        r1[i] = val;
      }
      for (int r = 0; r < m; ++r) r1[n + r] = -rp[r];
    };
    auto bound_dirs = [&](const Vec& ddx, Vec& l, Vec& u, const Vec& tcl,
                          const Vec& tcu) {
      for (int i = 0; i < n; ++i) {
        std::size_t si = static_cast<std::size_t>(i);
        if (hasL[si]) l[i] = (tcl[i] - zl[i] * ddx[i]) / std::max(v[i], 1e-14);
        if (hasU[si]) u[i] = (tcu[i] + zu[i] * ddx[i]) / std::max(w[i], 1e-14);
      }
    };
    auto step_len = [&](const Vec& ddx, const Vec& l, const Vec& u, double& ap,
                        double& ad) {
      ap = 1.0;
      ad = 1.0;
      for (int i = 0; i < n; ++i) {
        std::size_t si = static_cast<std::size_t>(i);
        if (hasL[si]) {
          if (ddx[i] < 0) ap = std::min(ap, -v[i] / ddx[i]);
          if (l[i] < 0) ad = std::min(ad, -zl[i] / l[i]);
        }
        if (hasU[si]) {
          if (ddx[i] > 0) ap = std::min(ap, w[i] / ddx[i]);
          if (u[i] < 0) ad = std::min(ad, -zu[i] / u[i]);
        }
      }
    };

    // Predictor.
    for (int i = 0; i < n; ++i) {
      std::size_t si = static_cast<std::size_t>(i);
      rcl[i] = hasL[si] ? -v[i] * zl[i] : 0.0;
      rcu[i] = hasU[si] ? -w[i] * zu[i] : 0.0;
    }
    assemble_rhs();
    if (!kkt_solve(r1, sol)) {
      out.status = RelaxStatus::NumFail;
      return out;
    }
    dx_aff = sol.head(n);
    // Dual-infeasibility certificate: an objective-improving feasible ray.
    {
      double dn = dx_aff.lpNorm<Eigen::Infinity>();
      if (dn > 1e-6) {
        bool ray = true;
        if (m > 0) ray = (em.A * dx_aff).lpNorm<Eigen::Infinity>() <= 1e-8 * dn;
        if (ray)
          for (int i = 0; i < n && ray; ++i) {
            std::size_t si = static_cast<std::size_t>(i);
            if (hasL[si] && dx_aff[i] < -1e-8 * dn) ray = false;
            if (hasU[si] && dx_aff[i] > 1e-8 * dn) ray = false;
            if (em.q[i] * std::abs(dx_aff[i]) > 1e-8 * dn) ray = false;
          }
        if (ray && em.c.dot(dx_aff) < -1e-8 * dn * (1.0 + cnorm)) {
          out.status = RelaxStatus::Unbounded;
          return out;
        }
      }
    }
    bound_dirs(dx_aff, dzl_aff, dzu_aff, rcl, rcu);
    double ap_aff, ad_aff;
    step_len(dx_aff, dzl_aff, dzu_aff, ap_aff, ad_aff);
    double mu_aff = 0.0;
    if (m_act > 0) {
      for (int i = 0; i < n; ++i) {
        std::size_t si = static_cast<std::size_t>(i);
        if (hasL[si])
          mu_aff += (v[i] + ap_aff * dx_aff[i]) * (zl[i] + ad_aff * dzl_aff[i]);
        if (hasU[si])
          mu_aff += (w[i] - ap_aff * dx_aff[i]) * (zu[i] + ad_aff * dzu_aff[i]);
      }
      mu_aff /= m_act;
    }
    double sigma = 0.0;
    if (mu > 1e-300) {
      double ratio = std::clamp(mu_aff / mu, 0.0, 1.0);
      sigma = ratio * ratio * ratio;
    }

    // Corrector.
    for (int i = 0; i < n; ++i) {
      std::size_t si = static_cast<std::size_t>(i);
      if (hasL[si]) rcl[i] = sigma * mu - v[i] * zl[i] - dx_aff[i] * dzl_aff[i];
      if (hasU[si]) rcu[i] = sigma * mu - w[i] * zu[i] + dx_aff[i] * dzu_aff[i];
    }
    assemble_rhs();
    if (!kkt_solve(r1, sol)) {
      out.status = RelaxStatus::NumFail;
      return out;
    }
    dx = sol.head(n);
    if (m > 0) dy = -sol.tail(m);
    bound_dirs(dx, dzl, dzu, rcl, rcu);
    double ap, ad;
    step_len(dx, dzl, dzu, ap, ad);
    double tau = mu < 1e-6 ? 0.99995 : 0.995;
    ap = std::min(1.0, tau * ap);
    ad = std::min(1.0, tau * ad);
    if (m_act == 0) ap = ad = 1.0;  // plain Newton on an equality QP
    x += ap * dx;
    if (m > 0) y += ad * dy;
    for (int i = 0; i < n; ++i) {
      std::size_t si = static_cast<std::size_t>(i);
      if (hasL[si]) {
        v[i] = std::max(x[i] - em.lo[i], 1e-14);
        zl[i] = std::max(zl[i] + ad * dzl[i], 1e-14);
      }
      if (hasU[si]) {
        w[i] = std::max(em.hi[i] - x[i], 1e-14);
        zu[i] = std::max(zu[i] + ad * dzu[i], 1e-14);
      }
    }
  }
  out.status = RelaxStatus::NumFail;
  return out;
}

// Feasibility certificate: minimize the sum of row elastics.
bool rows_feasible(const Presolved& p, const IpmOptions& opts, bool& conclusive) {
  std::vector<double> lo = p.lo, hi = p.hi;
  std::vector<double> c(p.lo.size(), 0.0), q(p.lo.size(), 0.0);
  std::vector<RelRow> rows = p.rows;
  int next = static_cast<int>(lo.size());
  double bscale = 1.0;
  for (const auto& r : rows) bscale = std::max(bscale, std::abs(r.rhs));
  int first_elastic = next;
  for (auto& r : rows) {
    if (r.rel == Rel::Eq || r.rel == Rel::Ge) {
      lo.push_back(0.0);
      hi.push_back(kInf);
      c.push_back(1.0);
      q.push_back(0.0);
      r.terms.push_back({next++, 1.0});
    }
    if (r.rel == Rel::Eq || r.rel == Rel::Le) {
      lo.push_back(0.0);
      hi.push_back(kInf);
      c.push_back(1.0);
      q.push_back(0.0);
      r.terms.push_back({next++, -1.0});
    }
  }
  EqModel em = build_eq_model(lo, hi, c, q, rows);
  equilibrate(em);
  IpmOptions eopts = opts;
  eopts.max_iter = std::max(opts.max_iter, 200);
  IpmOutcome res = run_ipm(em, eopts);
  if (res.status != RelaxStatus::Optimal) {
    conclusive = false;
    return true;
  }
  conclusive = true;
  double total = 0.0;
  for (int i = first_elastic; i < em.n_struct; ++i)
    total += std::abs(res.x[i] * em.col_scale[i]);
  return total <= 1e-7 * (1.0 + bscale);
}

}  // namespace

RelaxResult solve_node(const RelaxBase& base, const std::vector<double>& lo,
                       const std::vector<double>& hi, const IpmOptions& opts) {
  Presolved p = presolve(base, lo, hi);
  if (p.infeasible) return {RelaxStatus::Infeasible, {}, 0.0, 0};

  RelaxResult reduced;
  if (p.rows.empty()) {
    reduced = solve_box(p);
  } else {
    EqModel em = build_eq_model(p.lo, p.hi, p.c, p.q, p.rows);
    equilibrate(em);
    IpmOutcome ipm = run_ipm(em, opts);
    if (ipm.status == RelaxStatus::NumFail) {
      bool conclusive = false;
      if (!rows_feasible(p, opts, conclusive) && conclusive)
        return {RelaxStatus::Infeasible, {}, 0.0, ipm.iterations};
      IpmOptions retry = opts;
      retry.max_iter = opts.max_iter * 2;
      retry.delta_primal = opts.delta_primal * 100.0;
      retry.delta_dual = opts.delta_dual * 100.0;
      IpmOutcome second = run_ipm(em, retry);
      second.iterations += ipm.iterations;
      ipm = second;
    }
    if (ipm.status != RelaxStatus::Optimal)
      return {ipm.status, {}, 0.0, ipm.iterations};
    reduced.status = RelaxStatus::Optimal;
    reduced.iterations = ipm.iterations;
    reduced.obj = p.c0;
    reduced.x.assign(p.live.size(), 0.0);
    for (std::size_t i = 0; i < p.live.size(); ++i) {
      double xv = ipm.x[static_cast<int>(i)] * em.col_scale[static_cast<int>(i)];
      xv = std::clamp(xv, p.lo[i], p.hi[i]);
      reduced.x[i] = xv;
      reduced.obj += p.c[i] * xv + p.q[i] * xv * xv;
    }
  }
  if (reduced.status != RelaxStatus::Optimal) return reduced;

  RelaxResult full;
  full.status = RelaxStatus::Optimal;
  full.iterations = reduced.iterations;
  full.obj = reduced.obj;
  full.x.assign(static_cast<std::size_t>(base.n), 0.0);
  for (int vidx = 0; vidx < base.n; ++vidx) {
    std::size_t sv = static_cast<std::size_t>(vidx);
    if (p.fixed[sv]) full.x[sv] = p.fixval[sv];
  }
  for (std::size_t i = 0; i < p.live.size(); ++i)
    full.x[static_cast<std::size_t>(p.live[i])] = reduced.x[i];
  return full;
}

}  // namespace cbsim::opt::detail
