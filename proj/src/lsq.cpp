#include "lsq.hpp"

#include <sic/errors.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace sic::detail {

NormalEquations::NormalEquations(Eigen::Index n_cols)
    : gram_(Eigen::MatrixXcd::Zero(n_cols, n_cols)), rhs_(Eigen::VectorXcd::Zero(n_cols))
{}

void NormalEquations::add_rows(const Eigen::MatrixXcd& regressors, const Eigen::VectorXcd& target)
{
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(regressors.adjoint());
    rhs_.noalias() += regressors.adjoint() * target;
    rows_ += regressors.rows();
}

LsqSolution NormalEquations::solve(const std::string& what) const
{
    const Eigen::Index n = gram_.rows();
    Eigen::MatrixXcd g = gram_.selfadjointView<Eigen::Lower>();
    Eigen::VectorXd scale(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = g(i, i).real();
        if (!(d > 0.0) || !std::isfinite(d)) {
            std::ostringstream os;
            os << what << ": regressor " << i << " is identically zero or not finite (condition estimate inf)";
            throw IllConditioned(os.str(), std::numeric_limits<double>::infinity());
        }
        scale(i) = 1.0 / std::sqrt(d);
    }
    g = scale.asDiagonal() * g * scale.asDiagonal();
    g.diagonal().array() += kRidge;

    Eigen::LLT<Eigen::MatrixXcd> llt(g);
    const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    if (!(rcond >= kMinRcond)) {
        std::ostringstream os;
        os << what << ": normal equations are rank deficient beyond regularization (condition estimate "
           << (rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) << ")";
        throw IllConditioned(os.str(), rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    }
    const Eigen::VectorXcd z = llt.solve(scale.asDiagonal() * rhs_);
    return {scale.asDiagonal() * z, 1.0 / rcond};
}

} // namespace sic::detail
