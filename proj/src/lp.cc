#include "mmsched/lp.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mmsched/error.h"
#include "mmsched/network_io.h"

namespace mmsched {

void LinearProgram::add_row(std::vector<double> coefficients, double bound) {
  rows.push_back(std::move(coefficients));
  rhs.push_back(bound);
}

void LinearProgram::validate() const {
  if (rows.size() != rhs.size()) {
    throw Error(ErrorCode::kPrecondition, "LP has mismatched row and bound counts");
  }
  for (double c : objective) {
    if (!std::isfinite(c)) throw Error(ErrorCode::kPrecondition, "LP objective is not finite");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != objective.size()) {
      throw Error(ErrorCode::kPrecondition,
                  "LP row " + std::to_string(i) + " has the wrong length");
    }
    if (!std::isfinite(rhs[i])) {
      throw Error(ErrorCode::kPrecondition, "LP bound " + std::to_string(i) + " is not finite");
    }
    for (double a : rows[i]) {
      if (!std::isfinite(a)) {
        throw Error(ErrorCode::kPrecondition,
                    "LP row " + std::to_string(i) + " has a non-finite coefficient");
      }
    }
  }
}

std::string_view lp_status_name(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

// Row-major simplex tableau with the reduced-cost row kept alongside.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), cols_(cols), data_(rows * (cols + 1), 0.0), cost_(cols + 1, 0.0),
        basis_(rows, 0) {}

  double& at(std::size_t i, std::size_t j) { return data_[i * (cols_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * (cols_ + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, cols_); }
  double rhs(std::size_t i) const { return at(i, cols_); }
  std::vector<double>& cost() { return cost_; }
  std::vector<int>& basis() { return basis_; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t r, std::size_t c) {
    double* prow = &data_[r * (cols_ + 1)];
    const double inv = 1.0 / prow[c];
    for (std::size_t j = 0; j <= cols_; ++j) prow[j] *= inv;
    prow[c] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &data_[i * (cols_ + 1)];
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) row[j] -= f * prow[j];
      row[c] = 0.0;
    }
    const double f = cost_[c];
    if (f != 0.0) {
      for (std::size_t j = 0; j <= cols_; ++j) cost_[j] -= f * prow[j];
      cost_[c] = 0.0;
    }
    basis_[r] = static_cast<int>(c);
  }

 private:
  std::size_t m_;
  std::size_t cols_;
  std::vector<double> data_;
  std::vector<double> cost_;
  std::vector<int> basis_;
};

enum class PhaseResult { kOptimal, kUnbounded };

// Maximizes the objective encoded in the tableau cost row using Bland's rule:
// the lowest-index improving column enters, ties in the ratio test leave by
// lowest basic column index.
PhaseResult run_phase(Tableau& t, const std::vector<bool>& may_enter, double tol,
                      std::size_t max_iterations, std::size_t& iterations) {
  while (true) {
    std::size_t enter = t.cols();
    for (std::size_t j = 0; j < t.cols(); ++j) {
      if (may_enter[j] && t.cost()[j] > tol) {
        enter = j;
        break;
      }
    }
    if (enter == t.cols()) return PhaseResult::kOptimal;

    std::size_t leave = t.rows();
    double best = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      const double a = t.at(i, enter);
      if (a <= tol) continue;
      const double ratio = std::max(t.rhs(i), 0.0) / a;
      if (leave == t.rows() || ratio < best - 1e-12) {
        leave = i;
        best = ratio;
      } else if (ratio <= best + 1e-12 && t.basis()[i] < t.basis()[leave]) {
        leave = i;
        best = std::min(best, ratio);
      }
    }
    if (leave == t.rows()) return PhaseResult::kUnbounded;
    if (++iterations > max_iterations) {
      throw Error(ErrorCode::kInternal, "simplex iteration limit exceeded");
    }
    t.pivot(leave, enter);
  }
}

}  // namespace

LpSolution SimplexSolver::solve(const LinearProgram& lp) const {
  lp.validate();
  const double tol = options_.tolerance;
  const std::size_t n = lp.variable_count();
  const std::size_t m = lp.row_count();

  // Equilibrate rows, then flip rows with negative bounds so every right-hand
  // side is nonnegative. Flipped rows get a surplus column and an artificial.
  std::vector<std::vector<double>> a = lp.rows;
  std::vector<double> b = lp.rhs;
  std::vector<double> slack_sign(m, 1.0);
  std::size_t artificial_count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double scale = 0.0;
    for (double v : a[i]) scale = std::max(scale, std::abs(v));
    if (scale > 0.0) {
      for (double& v : a[i]) v /= scale;
      b[i] /= scale;
    }
    if (b[i] < 0.0) {
      for (double& v : a[i]) v = -v;
      b[i] = -b[i];
      slack_sign[i] = -1.0;
      ++artificial_count;
    }
  }

  const std::size_t cols = n + m + artificial_count;
  Tableau t(m, cols);
  std::size_t next_artificial = n + m;
  std::vector<bool> is_artificial(cols, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = a[i][j];
    t.at(i, n + i) = slack_sign[i];
    t.rhs(i) = b[i];
    if (slack_sign[i] > 0.0) {
      t.basis()[i] = static_cast<int>(n + i);
    } else {
      t.at(i, next_artificial) = 1.0;
      t.basis()[i] = static_cast<int>(next_artificial);
      is_artificial[next_artificial] = true;
      ++next_artificial;
    }
  }

  LpSolution sol;
  std::vector<bool> may_enter(cols, true);

  if (artificial_count > 0) {
    // Phase 1: maximize -(sum of artificials).
    auto& cost = t.cost();
    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      if (is_artificial[j]) cost[j] = -1.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[static_cast<std::size_t>(t.basis()[i])]) continue;
      for (std::size_t j = 0; j <= cols; ++j) cost[j] += t.at(i, j);
    }
    run_phase(t, may_enter, tol, options_.max_iterations, sol.iterations);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (is_artificial[static_cast<std::size_t>(t.basis()[i])]) infeasibility += t.rhs(i);
    }
    if (infeasibility > tol) {
      sol.status = LpStatus::kInfeasible;
      sol.basis = t.basis();
      return sol;
    }
    // Drive remaining zero-level artificials out where possible; rows where
    // that fails are redundant and keep their artificial at zero.
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[static_cast<std::size_t>(t.basis()[i])]) continue;
      for (std::size_t j = 0; j < n + m; ++j) {
        if (std::abs(t.at(i, j)) > tol) {
          t.pivot(i, j);
          break;
        }
      }
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (is_artificial[j]) may_enter[j] = false;
    }
  }

  // Phase 2 on the scaled objective.
  double cscale = 0.0;
  for (double c : lp.objective) cscale = std::max(cscale, std::abs(c));
  if (cscale == 0.0) cscale = 1.0;
  auto& cost = t.cost();
  std::fill(cost.begin(), cost.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = lp.objective[j] / cscale;
  for (std::size_t i = 0; i < m; ++i) {
    const auto bj = static_cast<std::size_t>(t.basis()[i]);
    const double cb = bj < n ? lp.objective[bj] / cscale : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= cols; ++j) cost[j] -= cb * t.at(i, j);
  }
  const PhaseResult result = run_phase(t, may_enter, tol, options_.max_iterations,
                                       sol.iterations);
  sol.basis = t.basis();
  if (result == PhaseResult::kUnbounded) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }

  sol.status = LpStatus::kOptimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto bj = static_cast<std::size_t>(t.basis()[i]);
    if (bj < n) sol.x[bj] = std::max(t.rhs(i), 0.0);
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];
  return sol;
}

const LpSolver& default_lp_solver() {
  static const SimplexSolver solver;
  return solver;
}

void dump_lp(const LinearProgram& lp, std::ostream& out) {
  out << "LP " << lp.variable_count() << " " << lp.row_count() << "\n";
  out << "MAX";
  for (double c : lp.objective) out << " " << format_double(c);
  out << "\n";
  for (std::size_t i = 0; i < lp.row_count(); ++i) {
    out << "R" << i;
    for (double v : lp.rows[i]) out << " " << format_double(v);
    out << " <= " << format_double(lp.rhs[i]) << "\n";
  }
}

}  // namespace mmsched
