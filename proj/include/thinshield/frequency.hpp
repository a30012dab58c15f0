#pragma once

#include "thinshield/energy.hpp"
#include "thinshield/field.hpp"

#include <vector>

namespace thinshield {

/// phi = 1 on [0,1/2], 2(1-t) on (1/2,1], 0 beyond.
double cutoff_phi(double t);
/// 0, -2, 0 on the three pieces; left limits at the kinks.
double cutoff_phi_prime(double t);

/// Frequency data at (x0, r). Full-ball integrals (twice the half-ball quadrature).
///   D     = int phi(|x-x0|/r) theta |grad u|^2
///   H     = -int phi'(.) theta u^2 / |x-x0|
///   E     = -int phi'(.) theta (|x-x0|/r^2) (grad u . e)^2,  e = (x-x0)/|x-x0|
///   D_alt = -(1/r) int phi'(.) theta u grad u . e            (equals D for solutions)
struct FrequencyRecord {
    Point x0 = Point::Zero();
    double r = 0.0;
    double D = 0.0;
    double H = 0.0;
    double E = 0.0;
    double D_alt = 0.0;
    double I = 0.0;
    bool degenerate = false;
};

/// Checks x0 on the thin plane and 0 < r <= 1 - |x0|.
void check_center_radius(const Mesh& mesh, const Point& x0, double r);

FrequencyRecord compute_DHE(const ScalarField& u, const WeightField& weight, const Point& x0,
                            double r);

/// I = r D / H; throws Degenerate when H vanishes.
double frequency(const ScalarField& u, const WeightField& weight, const Point& x0, double r);

/// Smallest radius at which discrete frequencies are trusted (10 h).
double trusted_radius(const Mesh& mesh);

/// Integrals over B_r(x0) intersected with B_1^+ (half ball, not doubled).
struct BallMoments {
    double l2 = 0.0;         ///< int u^2
    double dirichlet = 0.0;  ///< int |grad u|^2
    double horizontal = 0.0; ///< int |grad' u|^2 (all but the last component)
};
BallMoments ball_moments(const ScalarField& u, const Point& x0, double r);

struct MonotonicityReport {
    std::vector<double> radii;
    std::vector<double> I;
    double c_fit = 0.0;
    /// max over consecutive radii of (e^{C t_i} I_i - e^{C t_{i+1}} I_{i+1})_+ at C = c_fit.
    double worst_violation = 0.0;
    /// Same for the additive form I + C t.
    double worst_violation_additive = 0.0;
    /// Smallest C >= 0 making e^{Ct} I nondecreasing (resp. I + Ct).
    double minimal_c = 0.0;
    double minimal_c_additive = 0.0;
    bool pass = false;
};

MonotonicityReport monotonicity_audit(const ScalarField& u, const WeightField& weight,
                                      const Point& x0, const std::vector<double>& radii,
                                      double c_fit, double tol_mono = 1e-3);

struct PinchingRecord {
    Point x = Point::Zero();
    double rho = 0.0;
    double r = 0.0;
    double delta = 0.0;
    double c_add = 0.0;
};

PinchingRecord pinching(const ScalarField& u, const WeightField& weight, const Point& x,
                        double rho, double r, double c_add);

struct DoublingReport {
    std::vector<double> radii;
    std::vector<double> H;
    std::vector<double> ball_l2; ///< int_{B_r} u^2 over the full ball
    /// Worst increase of e^{-Cr} H / r^{n+2 A2} (should not increase).
    double upper_violation = 0.0;
    /// Worst decrease of e^{Cr} H / r^{n+2 A1} (should not decrease).
    double lower_violation = 0.0;
    /// min over radii of the relative slack in r/4 H <= int u^2 <= 2 sqrt(1+L^2) e^{Cr} r H.
    double sandwich_slack = 0.0;
    bool pass = false;
};

/// Throws InvalidArgument when a measured frequency leaves [A1, A2] by more than `tol`.
DoublingReport doubling_audit(const ScalarField& u, const WeightField& weight, const Point& x0,
                              const std::vector<double>& radii, double A1, double A2, double C,
                              double L, double tol = 1e-2);

struct VariationReport {
    std::vector<double> radii;
    std::vector<double> D;
    std::vector<double> D_alt;
    std::vector<double> H;
    std::vector<double> identity_error; ///< |D - D_alt| / max(D, H/r) per radius
    std::vector<double> eps_D;          ///< D' - (n-1)/r D - 2E
    std::vector<double> eps_H;          ///< H' - n/r H - 2D
    double worst_identity = 0.0;
    double worst_eps_D = 0.0;           ///< max r |eps_D| / D
    double worst_eps_H = 0.0;           ///< max r |eps_H| / H
};

/// Derivatives come from the fourth-order central stencil on the geometric grid
/// r q^{-2}, r q^{-1}, r q, r q^2 with log q = min(log 1.05, 2h).
VariationReport variation_identity_audit(const ScalarField& u, const WeightField& weight,
                                         const Point& x0, const std::vector<double>& radii);

struct PoincareReport {
    double sphere_l2 = 0.0; ///< int_{dB_r} u^2
    double ball_dirichlet = 0.0;
    double constant = 0.0;  ///< smallest C in LHS <= C (r D + r^{n+3})
};

PoincareReport poincare_audit(const ScalarField& u, const Point& x0, double r);

struct LowerBoundReport {
    double min_frequency = 0.0;
    Point argmin_point = Point::Zero();
    double argmin_radius = 0.0;
    int evaluated = 0;
    int skipped = 0; ///< (point, radius) pairs outside the domain or degenerate
};

LowerBoundReport frequency_lower_bound_audit(const ScalarField& u, const WeightField& weight,
                                             const std::vector<Point>& gamma,
                                             const std::vector<double>& radii);

struct OscillationReport {
    double lhs = 0.0;         ///< |I(x1, R rho) - I(x2, R rho)|
    double delta1 = 0.0;
    double delta2 = 0.0;
    double rhs_base = 0.0;    ///< sqrt(delta1) + sqrt(delta2) + R rho
    double constant = 0.0;    ///< lhs / rhs_base
};

OscillationReport spatial_oscillation_audit(const ScalarField& u, const WeightField& weight,
                                            const Point& x0, const Point& x1, const Point& x2,
                                            double rho, double R, double c_add);

struct DeGiorgiReport {
    double lhs = 0.0;   ///< jump proxy of int_{B_r^+ cap {v>k}} |grad v|^2
    double rhs = 0.0;   ///< r^{-2} int_{B_2r^+} (v-k)_+^2
    double ratio = 0.0;
};

/// v = sign * d_i u (cellwise); sign is +1 or -1.
DeGiorgiReport degiorgi_class_audit(const ScalarField& u, const Point& x0, double r, double k,
                                    int direction, int sign = 1);

} // namespace thinshield
