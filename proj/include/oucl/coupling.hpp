#pragma once

#include <Eigen/Dense>
#include <vector>

#include "oucl/levy_measure.hpp"
#include "oucl/ou_model.hpp"
#include "oucl/rng.hpp"

namespace oucl {

// One draw of the paired jump (U, U + delta_u): U is distributed like the
// normalized jump law, and so is U + delta_u; delta_u is +a, -a or 0, with
// the +a and -a rows each carrying half of the overlap mass between the jump
// law and its shift by a.
struct MinekaDraw {
    Eigen::VectorXd u;
    Eigen::VectorXd delta_u;
    int direction = 0;  // sign of delta_u relative to a: -1, 0, +1
};

MinekaDraw mineka_pair(const FiniteMeasure& nu_bar, const Eigen::VectorXd& a, RngStream& rng);

// Rotation taking `target` to |target| * e_1 (Householder reflections).
struct RotationOp {
    Eigen::VectorXd target;
    Eigen::MatrixXd matrix;
};

RotationOp rotation_to_e1(const Eigen::VectorXd& target);

// A coupled pair of weighted random walks driven by one stream of paired
// jumps.  walk[k-1] and walk_mirror[k-1] are the first coordinates (after
// rotation) of the k-step partial sums; their difference moves on the exact
// lattice {m * gap}.  coupling_step is the first k at which
// walk_k = walk_mirror_k + gap, kNotCoupled if that never happens before the
// horizon, and 0 when the two start points coincide.
struct CouplingRun {
    static constexpr int kNotCoupled = -1;

    double t = 0.0;
    double gap = 0.0;  // |e^{tA}(x - y)|
    std::vector<double> jump_times;
    std::vector<Eigen::VectorXd> a_list;
    std::vector<double> walk;
    std::vector<double> walk_mirror;
    std::vector<double> stay_probs;
    std::vector<int> directions;
    int coupling_step = kNotCoupled;

    bool coupled() const { return coupling_step >= 0; }
};

CouplingRun run_coupled_walks(const OUModel& model, double epsilon, double t,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                              RngStream& rng);

// Grid-certified infimum over |a| <= delta of the overlap mass between the
// normalized measure and its shift by a.
double gamma_delta(const FiniteMeasure& nu_bar, double delta, int grid = 201);

// Theoretical envelope for the coupling-time tail:
// c_clt / sqrt(k) + 4 (1 - gamma) / (gamma k).
double coupling_tail_bound(double gamma, int k, double c_clt);

}  // namespace oucl
