#include "artic/qp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "artic/error.hpp"

namespace artic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// n^T x >= b, or n^T x == b when `equality`.
struct Constraint {
  Eigen::VectorXd normal;
  double bound = 0.0;
  bool equality = false;
};

std::vector<Constraint> collect(const QpProblem& p, int n) {
  std::vector<Constraint> out;
  for (int i = 0; i < n; ++i) {
    const double lo = p.lb.size() ? p.lb[i] : -kInf;
    const double hi = p.ub.size() ? p.ub[i] : kInf;
    if (lo > hi) {
      throw Error(ErrorKind::InconsistentBounds, "lb > ub for variable " + std::to_string(i));
    }
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
    if (std::isfinite(lo) && lo == hi) {
      out.push_back({e, lo, true});
      continue;
    }
    if (std::isfinite(lo)) out.push_back({e, lo, false});
    if (std::isfinite(hi)) out.push_back({-e, -hi, false});
  }
  for (int r = 0; r < p.a.rows(); ++r) {
    const double lo = p.lb_a[r];
    const double hi = p.ub_a[r];
    if (lo > hi) {
      throw Error(ErrorKind::InconsistentBounds, "lb_a > ub_a for row " + std::to_string(r));
    }
    const Eigen::VectorXd row = p.a.row(r).transpose();
    if (std::isfinite(lo) && lo == hi) {
      out.push_back({row, lo, true});
      continue;
    }
    if (std::isfinite(lo)) out.push_back({row, lo, false});
    if (std::isfinite(hi)) out.push_back({-row, -hi, false});
  }
  return out;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem) {
  const int n = static_cast<int>(problem.cost.rows());
  if (problem.cost.cols() != n || (problem.lb.size() && problem.lb.size() != n) ||
      (problem.ub.size() && problem.ub.size() != n) ||
      (problem.a.rows() && (problem.a.cols() != n || problem.lb_a.size() != problem.a.rows() ||
                            problem.ub_a.size() != problem.a.rows())) ||
      (problem.linear.size() && problem.linear.size() != n)) {
    throw Error(ErrorKind::PreconditionViolated, "QP dimensions are inconsistent");
  }
  const std::vector<Constraint> cons = collect(problem, n);

  Eigen::MatrixXd g = 0.5 * (problem.cost + problem.cost.transpose());
  const double reg = 1e-10 * std::max(1.0, g.diagonal().cwiseAbs().maxCoeff());
  g.diagonal().array() += reg;
  const Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::PreconditionViolated, "QP cost matrix is not positive semidefinite");
  }
  const Eigen::VectorXd lin = problem.linear.size() ? problem.linear : Eigen::VectorXd::Zero(n);

  QpSolution sol;
  Eigen::VectorXd x = -llt.solve(lin);

  std::vector<int> active;        // indices into cons
  std::vector<double> sign;       // orientation used for each active constraint
  std::vector<double> u;          // multipliers of the active set
  std::vector<char> is_active(cons.size(), 0);

  const auto direction = [&](const Eigen::VectorXd& np, Eigen::VectorXd& z, Eigen::VectorXd& r) {
    const int m = static_cast<int>(active.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = g;
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd nj = sign[j] * cons[active[j]].normal;
      kkt.block(0, n + j, n, 1) = nj;
      kkt.block(n + j, 0, 1, n) = nj.transpose();
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    rhs.head(n) = np;
    const Eigen::VectorXd s = kkt.fullPivLu().solve(rhs);
    z = s.head(n);
    r = s.tail(m);
  };

  const int max_iterations = 50 * static_cast<int>(cons.size() + 10);
  while (true) {
    if (++sol.iterations > max_iterations) {
      throw Error(ErrorKind::InfeasibleQp, "active-set iteration limit reached");
    }
    // most violated inactive constraint
    int p = -1;
    double worst = 0.0;
    double p_sign = 1.0;
    for (std::size_t c = 0; c < cons.size(); ++c) {
      if (is_active[c]) continue;
      const double s = cons[c].normal.dot(x) - cons[c].bound;
      const double tol = 1e-12 * std::max({1.0, std::abs(cons[c].bound),
                                          cons[c].normal.norm() * x.norm()});
      const double violation = cons[c].equality ? std::abs(s) : -s;
      if (violation > tol && violation > worst) {
        worst = violation;
        p = static_cast<int>(c);
        p_sign = (cons[c].equality && s > 0.0) ? -1.0 : 1.0;
      }
    }
    if (p < 0) break;

    const Eigen::VectorXd np = p_sign * cons[p].normal;
    const double bp = p_sign * cons[p].bound;
    double up = 0.0;
    while (true) {
      Eigen::VectorXd z, r;
      direction(np, z, r);
      double t1 = kInf;
      int k = -1;
      for (std::size_t j = 0; j < active.size(); ++j) {
        if (cons[active[j]].equality || r[j] <= 0.0) continue;
        const double t = u[j] / r[j];
        if (t < t1) {
          t1 = t;
          k = static_cast<int>(j);
        }
      }
      const double zn = z.dot(np);
      const double sp = np.dot(x) - bp;
      const double t2 = zn > 1e-14 * np.squaredNorm() ? -sp / zn : kInf;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) {
        throw Error(ErrorKind::InfeasibleQp, "constraints are infeasible");
      }
      if (std::isfinite(t2)) {
        x += t * z;
      }
      for (std::size_t j = 0; j < active.size(); ++j) {
        u[j] -= t * r[j];
      }
      up += t;
      if (t == t2) {
        active.push_back(p);
        sign.push_back(p_sign);
        u.push_back(up);
        is_active[p] = 1;
        break;
      }
      is_active[active[k]] = 0;
      active.erase(active.begin() + k);
      sign.erase(sign.begin() + k);
      u.erase(u.begin() + k);
    }
  }
  // Semidefinite costs make the unconstrained start huge and the updates lose
  // digits; re-solve the KKT system of the final active set directly.
  if (!active.empty()) {
    const int m = static_cast<int>(active.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd rhs(n + m);
    kkt.topLeftCorner(n, n) = g;
    rhs.head(n) = -lin;
    for (int j = 0; j < m; ++j) {
      const Eigen::VectorXd nj = sign[j] * cons[active[j]].normal;
      kkt.block(0, n + j, n, 1) = -nj;
      kkt.block(n + j, 0, 1, n) = nj.transpose();
      rhs[n + j] = sign[j] * cons[active[j]].bound;
    }
    const Eigen::VectorXd polished = kkt.fullPivLu().solve(rhs).head(n);
    const auto max_violation = [&](const Eigen::VectorXd& y) {
      double worst = 0.0;
      for (const auto& c : cons) {
        const double s = c.normal.dot(y) - c.bound;
        worst = std::max(worst, c.equality ? std::abs(s) : -s);
      }
      return worst;
    };
    if (polished.allFinite() && max_violation(polished) <= max_violation(x)) {
      x = polished;
    }
  }
  sol.x = x;
  sol.active = static_cast<int>(active.size());
  return sol;
}

}  // namespace artic
