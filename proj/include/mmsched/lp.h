#pragma once

#include <cstddef>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace mmsched {

// maximize objective . x  subject to  rows[i] . x <= rhs[i],  x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;

  explicit LinearProgram(std::size_t variables = 0) : objective(variables, 0.0) {}

  std::size_t variable_count() const { return objective.size(); }
  std::size_t row_count() const { return rows.size(); }

  void add_row(std::vector<double> coefficients, double bound);

  // Throws Error(kPrecondition) on ragged rows or non-finite data.
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

std::string_view lp_status_name(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  // Only meaningful when optimal.
  std::vector<double> x;
  double objective = 0.0;
  // Column basic in each row of the final tableau. Columns [0, n) are the
  // structural variables, [n, n + m) the row slacks, and anything above an
  // artificial left on a redundant row.
  std::vector<int> basis;
  std::size_t iterations = 0;
};

// Seam for substituting another solver. Implementations must return a basic
// (vertex) solution when the program is optimal.
class LpSolver {
 public:
  virtual ~LpSolver() = default;
  virtual LpSolution solve(const LinearProgram& lp) const = 0;
};

// Dense two-phase primal simplex with Bland's rule. Rows are equilibrated
// before solving. Deterministic for identical input.
class SimplexSolver final : public LpSolver {
 public:
  struct Options {
    double tolerance = 1e-9;
    std::size_t max_iterations = 5'000'000;
  };

  SimplexSolver() = default;
  explicit SimplexSolver(Options options) : options_(options) {}

  LpSolution solve(const LinearProgram& lp) const override;

 private:
  Options options_;
};

const LpSolver& default_lp_solver();

inline LpSolution solve_lp(const LinearProgram& lp) {
  return default_lp_solver().solve(lp);
}

// Fixed-layout text dump for debugging:
//   LP <variables> <rows>
//   MAX c0 c1 ...
//   R<i> a0 a1 ... <= b
void dump_lp(const LinearProgram& lp, std::ostream& out);

}  // namespace mmsched
