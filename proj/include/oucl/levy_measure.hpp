#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "oucl/interval_union.hpp"

namespace oucl {

class RngStream;

// One-dimensional density on an interval union.  Constant profiles get exact
// (quadrature-free) mass/overlap/sampling paths; Power is c*|z-center|^p with
// an integrable singularity allowed at `center`; Callable is a generic hook.
struct DensityProfile {
    enum class Kind { Constant, Power, Callable };
    Kind kind = Kind::Constant;
    double height = 1.0;                    // Constant
    double center = 0.0, exponent = 0.0, coeff = 1.0;  // Power
    std::function<double(double)> fn;       // Callable

    double operator()(double z) const;
    static DensityProfile constant(double h);
    static DensityProfile power(double center, double exponent, double coeff);
    static DensityProfile callable(std::function<double(double)> f);
};

struct AtomicMeasure {
    std::vector<Eigen::VectorXd> locations;
    std::vector<double> masses;
};

struct DensityMeasure {
    IntervalUnion support;
    DensityProfile profile;
    int quad_cells = 4096;  // midpoint cells per interval
};

// Rotationally invariant alpha-stable measure, normalized so that the real
// part of its characteristic exponent is scale * |xi|^alpha.
struct StableMeasure {
    double alpha;
    double scale;
    int dim;
};

// Spherical decomposition: finitely many directions theta_j with weights w_j,
// radial density s^{-1-alpha} on (0, r0] and s^{-1-beta} on (r0, inf)
// (beta = infinity truncates the tail at r0).
struct SphericalAtom {
    Eigen::VectorXd direction;
    double weight;
};

struct SphericalStableMeasure {
    double alpha;
    double beta;  // may be std::numeric_limits<double>::infinity()
    double r0;
    std::vector<SphericalAtom> atoms;
    int dim;
};

struct LevyMeasure {
    std::variant<AtomicMeasure, DensityMeasure, StableMeasure, SphericalStableMeasure> rep;
    int dim = 1;

    static LevyMeasure atomic(std::vector<Eigen::VectorXd> locs, std::vector<double> masses);
    static LevyMeasure atomic1d(const std::vector<double>& locs, const std::vector<double>& masses);
    static LevyMeasure density(IntervalUnion support, DensityProfile profile, int quad_cells = 4096);
    static LevyMeasure stable(double alpha, double scale, int dim = 1);
    static LevyMeasure spherical(double alpha, double beta, double r0,
                                 std::vector<SphericalAtom> atoms);
    static LevyMeasure zero(int dim = 1);

    bool is_zero() const;
    bool finite_total_mass() const;
};

// Finite measure obtained from a Lévy measure by truncation (or as-is when the
// measure is already finite).  trunc_radius is 0 for untruncated measures.
struct FiniteMeasure {
    std::variant<AtomicMeasure, DensityMeasure, StableMeasure, SphericalStableMeasure> rep;
    int dim = 1;
    double trunc_radius = 0.0;
    double total_mass = 0.0;
};

// Density normalization constant k(alpha, d) such that the measure
// k * scale * |z|^{-d-alpha} dz has characteristic exponent scale*|xi|^alpha.
double stable_density_constant(double alpha, int dim);

double surface_area_unit_sphere(int dim);

// nu itself when nu(R^d) is finite, else nu restricted to {|z| >= eps}.
FiniteMeasure truncate(const LevyMeasure& nu, double eps);

FiniteMeasure normalize(const FiniteMeasure& mu);
FiniteMeasure shift_measure(const FiniteMeasure& mu, const Eigen::VectorXd& a);
FiniteMeasure shift_measure1d(const FiniteMeasure& mu, double a);

// Mean of the part charged strictly inside the unit ball; this is the
// deterministic drift the compensated-jump integral contributes.
Eigen::VectorXd open_ball_mean(const FiniteMeasure& mu);

// Mass of the lattice infimum mu ∧ nu = mu - (mu - nu)^+.  Supported for
// comparable representations (atomic-atomic and density-density).
double overlap_mass(const FiniteMeasure& mu, const FiniteMeasure& nu);

// Total variation norm of mu - nu (total-mass convention).
double variation_distance(const FiniteMeasure& mu, const FiniteMeasure& nu);

// min over a symmetric grid of shifts z (|z| <= delta, endpoints and 0
// included) of (nu_eps ∧ delta_z * nu_eps)(R^d).  Strictly positive values
// certify the overlap condition on the grid.
double shifted_overlap_infimum(const FiniteMeasure& nu_eps, double delta, int shift_grid = 201);

struct OverlapCertificate {
    double grid_min = 0.0;
    double argmin_shift = 0.0;
    double lipschitz_slack = 0.0;  // bound on variation between grid points
    int shift_grid = 0;
    double delta = 0.0;
};

OverlapCertificate shifted_overlap_certificate(const FiniteMeasure& nu_eps, double delta,
                                               int shift_grid = 201);

// Constructive lower bound for the shifted-overlap infimum of a density
// rho0 near a point z0 where 1/rho0 is locally integrable: returns a closed
// set F away from the origin, a shift radius delta, and
// lower_bound = (K - sup_{|x|<=delta} int_F |rho0 - rho0(.-x)|)/2 >= K/8
// with K = int_F rho0.
struct DensityOverlapRegion {
    IntervalUnion F;
    double delta = 0.0;
    double K = 0.0;
    double sup_l1_shift = 0.0;
    double lower_bound = 0.0;
};

DensityOverlapRegion density_overlap_region(const DensityMeasure& rho0, double z0, double eps,
                                            int probe_grid = 201);

// diagnostic: int_{|z| < eps} |z|^2 nu(dz)
double small_jump_quadratic_mass(const LevyMeasure& nu, double eps);

// Draws from a finite measure normalized to probability.
class MeasureSampler {
public:
    explicit MeasureSampler(const FiniteMeasure& mu);
    Eigen::VectorXd draw(RngStream& rng) const;
    double draw1d(RngStream& rng) const;
    int dim() const { return mu_.dim; }
    const FiniteMeasure& measure() const { return mu_; }

private:
    FiniteMeasure mu_;
    // atomic / piecewise tables
    std::vector<double> cum_;
    std::vector<double> cell_lo_, cell_hi_, cell_max_;
    bool rejection_ = false;
};

// Total mass of a density measure (closed form for constant/power profiles,
// composite midpoint otherwise).
double density_total_mass(const DensityMeasure& m);

// Density value at z for 1-d density representations (0 outside the support).
double density_value(const FiniteMeasure& mu, double z);

// Total variation of the density function (including boundary jumps); used
// as the Lipschitz slack constant for grid-certified overlap infima.
double profile_total_variation(const DensityMeasure& m);

}  // namespace oucl
