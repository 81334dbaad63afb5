#include "oucl/ou_model.hpp"

#include "oucl/common.hpp"
#include "oucl/spectral.hpp"

namespace oucl {

LevyTriplet LevyTriplet::make(Eigen::MatrixXd Q, Eigen::VectorXd b, LevyMeasure nu) {
    if (Q.rows() != Q.cols()) throw ConfigError("Gaussian covariance must be square");
    const int d = static_cast<int>(Q.rows());
    if (b.size() != d) throw ConfigError("drift dimension does not match covariance");
    if (nu.dim != d) throw ConfigError("jump-measure dimension does not match covariance");
    if ((Q - Q.transpose()).lpNorm<Eigen::Infinity>() > 1e-10)
        throw ConfigError("Gaussian covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw ConfigError("Gaussian covariance must be positive semidefinite");
    LevyTriplet tr;
    tr.Q = std::move(Q);
    tr.b = std::move(b);
    tr.nu = std::move(nu);
    tr.dim = d;
    return tr;
}

LevyTriplet LevyTriplet::pure_jump(LevyMeasure nu) {
    const int d = nu.dim;
    return make(Eigen::MatrixXd::Zero(d, d), Eigen::VectorXd::Zero(d), std::move(nu));
}

LevyTriplet LevyTriplet::gaussian1d(double q) {
    Eigen::MatrixXd Q(1, 1);
    Q << q;
    return make(Q, Eigen::VectorXd::Zero(1), LevyMeasure::zero(1));
}

OUModel OUModel::make(Eigen::MatrixXd A, Eigen::MatrixXd B, LevyTriplet triplet) {
    if (A.rows() != A.cols()) throw ConfigError("drift matrix must be square");
    const int n = static_cast<int>(A.rows());
    const int d = static_cast<int>(B.cols());
    if (B.rows() != n) throw ConfigError("noise matrix rows must match the state dimension");
    if (triplet.dim != d) throw ConfigError("driver dimension does not match noise matrix");
    if (!A.allFinite() || !B.allFinite()) throw ConfigError("model matrices must be finite");

    OUModel m;
    m.A = std::move(A);
    m.B = std::move(B);
    m.triplet = std::move(triplet);
    m.n = n;
    m.d = d;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    const double tol = 1e-12 * std::max(1.0, smax) * std::max(n, d);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    m.rank_B = r;
    if (r == n) {
        // minimal-norm right inverse: B * B_pinv = I_n
        Eigen::MatrixXd pinv = m.B.transpose() * (m.B * m.B.transpose()).inverse();
        if ((m.B * pinv - Eigen::MatrixXd::Identity(n, n)).lpNorm<Eigen::Infinity>() > 1e-8)
            throw AccuracyError("noise-matrix inverse did not verify");
        m.B_pinv = std::move(pinv);
    }
    return m;
}

OUModel OUModel::scalar(double a, double b_coef, LevyTriplet triplet) {
    Eigen::MatrixXd A(1, 1), B(1, 1);
    A << a;
    B << b_coef;
    return make(A, B, std::move(triplet));
}

Eigen::MatrixXd OUModel::flow(double t) const { return matrix_exponential(A, t); }

}  // namespace oucl
