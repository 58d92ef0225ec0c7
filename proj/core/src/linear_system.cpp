#include "ivflow/linear_system.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <regex>
#include <string>

#include "ivflow/errors.hpp"
#include "ivflow/layout.hpp"

namespace ivflow {

LinearSystem::LinearSystem(int n)
    : n_(n), rhs_(Eigen::VectorXd::Zero(n)), residual_(Eigen::VectorXd::Zero(n)) {
    slack_.d_re = Eigen::VectorXd::Zero(n);
    slack_.d_im = Eigen::VectorXd::Zero(n);
    triplets_.reserve(static_cast<std::size_t>(n) * 8);
}

void LinearSystem::add_entry(int row, int col, double value) {
    if (row >= 0 && col >= 0) triplets_.emplace_back(row, col, value);
}

void LinearSystem::add_rhs(int row, double value) {
    if (row >= 0) rhs_[row] += value;
}

template <typename Range>
void LinearSystem::add_impl(int row, double f, const Range& partials, const Eigen::VectorXd& x0) {
    if (row == kSlackRowR || row == kSlackRowI) {
        const bool re = row == kSlackRowR;
        (re ? slack_.re : slack_.im) += f;
        auto& grad = re ? slack_.d_re : slack_.d_im;
        for (const auto& p : partials) {
            if (p.col >= 0) grad[p.col] += p.value;
        }
        return;
    }
    if (row < 0) return;
    double jx = 0.0;
    for (const auto& p : partials) {
        if (p.col < 0) continue;
        triplets_.emplace_back(row, p.col, p.value);
        jx += p.value * x0[p.col];
    }
    rhs_[row] += jx - f;
    residual_[row] += f;
}

void LinearSystem::add(int row, double f, std::initializer_list<Partial> partials, const Eigen::VectorXd& x0) {
    add_impl(row, f, partials, x0);
}

void LinearSystem::add(int row, double f, const std::vector<Partial>& partials, const Eigen::VectorXd& x0) {
    add_impl(row, f, partials, x0);
}

Eigen::SparseMatrix<double> LinearSystem::matrix() const {
    std::vector<Eigen::Triplet<double>> all = triplets_;
    all.reserve(2 * triplets_.size());
    for (const auto& t : triplets_) all.emplace_back(t.col(), t.row(), 0.0);
    Eigen::SparseMatrix<double> a(n_, n_);
    a.setFromTriplets(all.begin(), all.end());
    return a;
}

double LinearSystem::max_residual() const { return n_ == 0 ? 0.0 : residual_.cwiseAbs().maxCoeff(); }

namespace {

void check_structure(const Eigen::SparseMatrix<double>& a) {
    std::vector<bool> row_seen(static_cast<std::size_t>(a.rows()), false);
    for (int c = 0; c < a.outerSize(); ++c) {
        bool col_seen = false;
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it) {
            if (it.value() == 0.0) continue;
            col_seen = true;
            row_seen[static_cast<std::size_t>(it.row())] = true;
        }
        if (!col_seen) throw SingularSystemError(c, "structurally singular: column " + std::to_string(c) + " is empty");
    }
    for (std::size_t r = 0; r < row_seen.size(); ++r) {
        if (!row_seen[r]) {
            throw SingularSystemError(static_cast<long>(r),
                                      "structurally singular: row " + std::to_string(r) + " is empty");
        }
    }
}

}  // namespace

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b) {
    if (a.rows() != a.cols() || a.rows() != b.size()) throw std::invalid_argument("solve_linear: shape mismatch");
    if (a.rows() == 0) return {};
    check_structure(a);

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success) {
        // Eigen reports the failing pivot as a column of the permuted matrix.
        long pivot = -1;
        std::smatch m;
        const std::string msg = lu.lastErrorMessage();
        if (std::regex_search(msg, m, std::regex("(\\d+)\\s*$"))) {
            const long k = std::stol(m[1]);
            const auto& perm = lu.colsPermutation().indices();
            for (int j = 0; j < perm.size(); ++j) {
                if (perm[j] == k) pivot = j;
            }
        }
        throw SingularSystemError(pivot, "numerically singular matrix at column " + std::to_string(pivot));
    }

    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    Eigen::VectorXd x = lu.solve(b);
    for (int pass = 0; pass < 3; ++pass) {
        const Eigen::VectorXd r = b - a * x;
        if (r.cwiseAbs().maxCoeff() / scale < 1e-13) break;
        x += lu.solve(r);
    }
    const double rel = (b - a * x).cwiseAbs().maxCoeff() / scale;
    if (!x.allFinite() || !(rel < 1e-6)) {
        throw SingularSystemError(-1, "numerically singular matrix (relative residual " + std::to_string(rel) + ")");
    }
    return x;
}

Eigen::VectorXd solve_linear(const LinearSystem& sys) { return solve_linear(sys.matrix(), sys.rhs()); }

}  // namespace ivflow
