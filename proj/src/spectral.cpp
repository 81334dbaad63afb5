#include "oucl/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oucl/common.hpp"

namespace oucl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int complex_rank(const Eigen::MatrixXcd& M, double tol) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    return r;
}

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A, double t) {
    if (!A.allFinite() || !std::isfinite(t)) throw ConfigError("matrix exponential of non-finite input");
    if (A.rows() != A.cols()) throw ConfigError("matrix exponential requires a square matrix");
    Eigen::MatrixXd E = (t * A).exp();
    if (!E.allFinite()) throw AccuracyError("matrix exponential overflow");
    return E;
}

double operator_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues()(0);
}

const char* stability_name(Stability s) {
    switch (s) {
        case Stability::AllNegative: return "all_negative";
        case Stability::NonpositiveSemisimple: return "nonpositive_semisimple";
        case Stability::HasPositive: return "has_positive";
        case Stability::NonpositiveDefective: return "nonpositive_defective";
    }
    return "unknown";
}

SpectralReport spectral_report(const Eigen::MatrixXd& A, double time_horizon, int grid) {
    if (A.rows() != A.cols() || A.rows() == 0) throw ConfigError("drift matrix must be square");
    if (!A.allFinite()) throw ConfigError("drift matrix must be finite");
    if (grid < 2) grid = 2;
    const int n = static_cast<int>(A.rows());
    const double normA = operator_norm(A);
    const double tol = 1e-9 * (1.0 + normA);

    SpectralReport rep;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    std::vector<std::complex<double>> evs(es.eigenvalues().data(),
                                          es.eigenvalues().data() + n);
    std::sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });

    // cluster nearby eigenvalues; defective blocks split under roundoff at
    // scale eps^{1/m}, so the cluster tolerance is much looser than `tol`
    const double cluster_tol = std::max(1e-6 * (1.0 + normA), 1e3 * tol);
    std::vector<bool> assigned(evs.size(), false);
    for (std::size_t i = 0; i < evs.size(); ++i) {
        if (assigned[i]) continue;
        std::complex<double> sum = evs[i];
        int count = 1;
        assigned[i] = true;
        for (std::size_t j = i + 1; j < evs.size(); ++j) {
            if (assigned[j]) continue;
            if (std::abs(evs[j] - evs[i]) <= cluster_tol) {
                sum += evs[j];
                ++count;
                assigned[j] = true;
            }
        }
        std::complex<double> rep_ev = sum / static_cast<double>(count);
        if (std::abs(rep_ev.imag()) <= tol) rep_ev = {rep_ev.real(), 0.0};
        if (std::abs(rep_ev.real()) <= tol) rep_ev = {0.0, rep_ev.imag()};
        Eigen::MatrixXcd shifted = A.cast<std::complex<double>>();
        shifted.diagonal().array() -= rep_ev;
        const int geom = n - complex_rank(shifted, std::max(tol, cluster_tol));
        rep.eigenvalues.push_back(rep_ev);
        rep.alg_mult.push_back(count);
        rep.geom_mult.push_back(std::max(1, geom));
    }

    rep.spectral_abscissa = -kInf;
    bool has_positive = false, has_imaginary = false;
    rep.semisimple_imaginary = true;
    bool diagonalizable = true;
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
        const double re = rep.eigenvalues[i].real();
        rep.spectral_abscissa = std::max(rep.spectral_abscissa, re);
        if (re > tol) has_positive = true;
        if (rep.geom_mult[i] < rep.alg_mult[i]) {
            diagonalizable = false;
            if (std::abs(re) <= tol) rep.semisimple_imaginary = false;
        }
        if (std::abs(re) <= tol) has_imaginary = true;
    }

    if (has_positive)
        rep.stability = Stability::HasPositive;
    else if (!has_imaginary)
        rep.stability = Stability::AllNegative;
    else if (rep.semisimple_imaginary)
        rep.stability = Stability::NonpositiveSemisimple;
    else
        rep.stability = Stability::NonpositiveDefective;

    if (diagonalizable) {
        const Eigen::MatrixXcd V = es.eigenvectors();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
        const double smin = svd.singularValues()(n - 1);
        rep.eigvec_condition = smin > 0 ? svd.singularValues()(0) / smin : kInf;
    } else {
        rep.eigvec_condition = kInf;
    }

    if (!rep.gate_passes()) {
        rep.c_a = kInf;
        return rep;
    }
    double best = 1.0;  // t = 0 gives the identity
    for (int i = 0; i < grid; ++i) {
        const double t = time_horizon * std::pow(10.0, -6.0 * (1.0 - double(i) / (grid - 1)));
        best = std::max(best, operator_norm(matrix_exponential(A, t)));
    }
    rep.c_a = best;
    return rep;
}

void require_bounded_semigroup(const SpectralReport& r) {
    if (!r.gate_passes())
        throw GateError(std::string("drift matrix admits growing modes (") +
                        stability_name(r.stability) +
                        "); the flow is not uniformly bounded");
}

}  // namespace oucl
