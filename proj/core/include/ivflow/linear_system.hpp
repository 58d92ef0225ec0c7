#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <initializer_list>
#include <vector>

namespace ivflow {

struct Partial {
    int col;
    double value;
};

/// Current through the slack bus, accumulated from its virtual KCL rows,
/// with its gradient over all unknowns.
struct SlackCurrent {
    double re = 0.0;
    double im = 0.0;
    Eigen::VectorXd d_re;
    Eigen::VectorXd d_im;
};

/// Triplet-accumulated NR system in direct-solution form: each equation
/// f(x) = 0 linearized at x0 contributes J to the matrix and J*x0 - f to the
/// right-hand side, so that matrix * x_next = rhs.
class LinearSystem {
public:
    explicit LinearSystem(int n);

    [[nodiscard]] int size() const { return n_; }

    void add_entry(int row, int col, double value);
    void add_rhs(int row, double value);

    /// Adds residual term `f` with partials to `row`. Rows or columns below
    /// zero are dropped, except the virtual slack rows which feed slack().
    void add(int row, double f, std::initializer_list<Partial> partials, const Eigen::VectorXd& x0);
    void add(int row, double f, const std::vector<Partial>& partials, const Eigen::VectorXd& x0);

    /// Assembled matrix. Duplicates are summed and the pattern is made
    /// structurally symmetric with explicit zeros.
    [[nodiscard]] Eigen::SparseMatrix<double> matrix() const;
    [[nodiscard]] const Eigen::VectorXd& rhs() const { return rhs_; }
    /// f(x0) per row.
    [[nodiscard]] const Eigen::VectorXd& residual() const { return residual_; }
    [[nodiscard]] double max_residual() const;
    [[nodiscard]] const SlackCurrent& slack() const { return slack_; }
    [[nodiscard]] const std::vector<Eigen::Triplet<double>>& triplets() const { return triplets_; }

private:
    template <typename Range>
    void add_impl(int row, double f, const Range& partials, const Eigen::VectorXd& x0);

    int n_;
    std::vector<Eigen::Triplet<double>> triplets_;
    Eigen::VectorXd rhs_;
    Eigen::VectorXd residual_;
    SlackCurrent slack_;
};

/// Sparse LU solve with iterative refinement. Throws SingularSystemError
/// carrying the offending row/column.
Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b);
Eigen::VectorXd solve_linear(const LinearSystem& sys);

}  // namespace ivflow
