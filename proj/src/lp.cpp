#include "polyreg/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "polyreg/error.hpp"

namespace polyreg::lp {
namespace {

// Dense simplex tableau. Row 0..m-1 hold constraints, row m holds the
// reduced costs of the current phase objective, last column holds the rhs.
class Tableau {
 public:
  Tableau(const Mat& A, const Vec& b) : m_(A.rows()), n_(A.cols()) {
    // Columns: n structural, m artificial, rhs.
    t_ = Mat::Zero(m_ + 1, n_ + m_ + 1);
    basis_.resize(m_);
    for (Index i = 0; i < m_; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(n_) = sign * A.row(i);
      t_(i, n_ + i) = 1.0;
      t_(i, rhs()) = sign * b[i];
      basis_[i] = n_ + i;
    }
    active_.assign(m_, true);
  }

  Index rhs() const { return n_ + m_; }

  void set_objective(const Vec& cost_full) {
    // Reduced costs r = c - c_B^T B^{-1} A, objective value stored negated.
    t_.row(m_).setZero();
    t_.row(m_).head(cost_full.size()) = cost_full.transpose();
    for (Index i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const double cb = basis_[i] < cost_full.size() ? cost_full[basis_[i]] : 0.0;
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(i);
    }
  }

  double objective_value() const { return -t_(m_, rhs()); }

  // Bland's rule iterations restricted to columns [0, allowed).
  Status iterate(Index allowed, const Options& options, long& pivots) {
    while (true) {
      Index enter = -1;
      for (Index j = 0; j < allowed; ++j) {
        if (t_(m_, j) < -options.optimality_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::kOptimal;

      Index leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < m_; ++i) {
        if (!active_[i]) continue;
        const double a = t_(i, enter);
        if (a <= options.pivot_tol) continue;
        const double ratio = t_(i, rhs()) / a;
        if (ratio < best_ratio - 1e-12 ||
            (std::abs(ratio - best_ratio) <= 1e-12 && leave >= 0 && basis_[i] < basis_[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return Status::kUnbounded;
      pivot(leave, enter);
      if (++pivots > options.max_pivots) return Status::kIterationLimit;
    }
  }

  void pivot(Index row, Index col) {
    t_.row(row) /= t_(row, col);
    for (Index i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  // After phase one: move remaining artificial basics out of the basis or
  // mark their rows redundant.
  void expel_artificials(double tol) {
    for (Index i = 0; i < m_; ++i) {
      if (!active_[i] || basis_[i] < n_) continue;
      Index col = -1;
      for (Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > tol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        active_[i] = false;
      }
    }
  }

  Vec solution() const {
    Vec x = Vec::Zero(n_);
    for (Index i = 0; i < m_; ++i) {
      if (active_[i] && basis_[i] < n_) x[basis_[i]] = std::max(0.0, t_(i, rhs()));
    }
    return x;
  }

 private:
  Index m_;
  Index n_;
  Mat t_;
  std::vector<Index> basis_;
  std::vector<bool> active_;
};

void check_shapes(const Mat& A, const Vec& b) {
  if (A.rows() != b.size()) throw DimensionError("lp: constraint matrix has " + std::to_string(A.rows()) +
                                                 " rows but rhs has " + std::to_string(b.size()));
}

}  // namespace

Result find_feasible(const Mat& A, const Vec& b, const Options& options) {
  check_shapes(A, b);
  const Index n = A.cols();
  const Index m = A.rows();
  Tableau tableau(A, b);
  Vec phase_one = Vec::Zero(n + m);
  phase_one.tail(m).setOnes();
  tableau.set_objective(phase_one);

  Result result;
  const Status s = tableau.iterate(n + m, options, result.pivots);
  result.infeasibility = std::max(0.0, tableau.objective_value());
  result.x = tableau.solution();
  const double scale = 1.0 + b.lpNorm<1>();
  if (s == Status::kIterationLimit) {
    result.status = s;
  } else {
    result.status =
        result.infeasibility <= options.feasibility_tol * scale ? Status::kOptimal : Status::kInfeasible;
  }
  return result;
}

Result solve_standard_form(const Mat& A, const Vec& b, const Vec& c, const Options& options) {
  check_shapes(A, b);
  if (c.size() != A.cols()) throw DimensionError("lp: cost vector length does not match column count");
  const Index n = A.cols();
  const Index m = A.rows();

  Tableau tableau(A, b);
  Vec phase_one = Vec::Zero(n + m);
  phase_one.tail(m).setOnes();
  tableau.set_objective(phase_one);

  Result result;
  Status s = tableau.iterate(n + m, options, result.pivots);
  result.infeasibility = std::max(0.0, tableau.objective_value());
  if (s == Status::kIterationLimit) {
    result.status = s;
    return result;
  }
  if (result.infeasibility > options.feasibility_tol * (1.0 + b.lpNorm<1>())) {
    result.status = Status::kInfeasible;
    return result;
  }

  tableau.expel_artificials(1e-9);
  tableau.set_objective(c);
  // Artificial columns are excluded from entering in phase two.
  s = tableau.iterate(n, options, result.pivots);
  result.status = s;
  result.x = tableau.solution();
  result.objective = c.dot(result.x);
  return result;
}

}  // namespace polyreg::lp
