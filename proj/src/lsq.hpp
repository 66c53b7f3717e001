#pragma once

#include <Eigen/Dense>

#include <string>

namespace sic::detail {

/// Ridge to the unit diagonal of the equilibrated Gram matrix.
inline constexpr double kRidge = 1e-12;
/// Below this reciprocal condition number the regularized system is refused.
inline constexpr double kMinRcond = 1e-13;

struct LsqSolution
{
    Eigen::VectorXcd coeffs;
    double condition_estimate = 1.0; ///< 1 / rcond of the equilibrated, regularized Gram matrix
};

/// Accumulates A^H A and A^H y block by block, then solves the Jacobi-equilibrated,
/// ridge-regularized normal equations with a Cholesky factorization.
class NormalEquations
{
public:
    explicit NormalEquations(Eigen::Index n_cols);

    void add_rows(const Eigen::MatrixXcd& regressors, const Eigen::VectorXcd& target);
    Eigen::Index rows_seen() const { return rows_; }

    /// Throws IllConditioned naming `what` and the condition estimate.
    LsqSolution solve(const std::string& what) const;

private:
    Eigen::MatrixXcd gram_;
    Eigen::VectorXcd rhs_;
    Eigen::Index rows_ = 0;
};

} // namespace sic::detail
