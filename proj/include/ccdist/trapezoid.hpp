#pragma once

// The 13-unknown stationarity system for the planar 5-body central
// configuration whose convex hull is a trapezoid with P2 on the side P1P3:
// ten gradient components of
//
//   W_245(r) = U(r) + m*delta*(I(r) - I_0) + omega*T_2(r) + theta*L_123(r)
//
// plus the three constraints I = I_0, T_2 = 0, L_123 = 0. Solutions are
// classified against the sign chain, the isosceles-triangle relation
// r24 = r25 = delta^(-1/3), and the closed-form Hessian spectrum, and their
// symmetry class is determined under the diagonal convention r14 <= r35.

#include "ccdist/constraints.hpp"
#include "ccdist/distgeo.hpp"
#include "ccdist/energetics.hpp"
#include "ccdist/newton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace ccdist {

class CollinearDegeneracy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ClassificationFlags {
    bool delta_positive = false;
    bool omega_positive = false;
    bool theta_positive = false;
    bool r24_eq_r25 = false;  // and both equal delta^(-1/3)
    bool inequality_chain = false;
    bool spectrum_positive = false;
    bool spectrum_matches_numeric = false;
    std::vector<std::string> violations;

    bool all() const
    {
        return delta_positive && omega_positive && theta_positive && r24_eq_r25 &&
               inequality_chain && spectrum_positive && spectrum_matches_numeric;
    }
};

enum class SymmetryClass { rectangle, symmetric_isosceles, asymmetric_r13_gt_r45, violation };

inline const char* to_string(SymmetryClass c)
{
    switch (c) {
        case SymmetryClass::rectangle: return "rectangle";
        case SymmetryClass::symmetric_isosceles: return "symmetric_isosceles";
        case SymmetryClass::asymmetric_r13_gt_r45: return "asymmetric_r13_gt_r45";
        default: return "violation";
    }
}

struct SymmetryVerdict {
    SymmetryClass cls = SymmetryClass::violation;
    // r12-r23, r14-r35, r15-r34, r24-r25, after canonicalization
    std::array<double, 4> constraint_defects = {0, 0, 0, 0};
    std::array<double, 2> mass_defects = {0, 0};  // m1-m3, m4-m5
    bool mirrored = false;  // relabelled 1<->3, 4<->5 to enforce r14 <= r35
    std::vector<std::string> violations;
};

struct TrapezoidSolution {
    DistanceVector r;
    MultiplierSet mult;
    double residual_norm = 0.0;
    int iterations = 0;
    double inertia_target = 0.0;
    std::array<double, 10> spectrum = {};
    ClassificationFlags flags;
    SymmetryVerdict symmetry;
};

using TrapezoidResult = std::variant<TrapezoidSolution, SolveFailure>;

inline bool converged(const TrapezoidResult& res)
{
    return std::holds_alternative<TrapezoidSolution>(res);
}

// The 13 residuals, in order: the ten stationarity components for pairs
// (1,2),(1,3),(1,4),(1,5),(2,3),(2,4),(2,5),(3,4),(3,5),(4,5), then
// I - I_target, T_2, L_123.
inline Eigen::VectorXd residual_system(const DistanceVector& r, const MultiplierSet& mult,
                                       const MassVector& m, double inertia_target = -1.0)
{
    if (r.n() != 5 || m.n() != 5)
        throw std::invalid_argument("residual_system: expects n = 5");
    if (inertia_target <= 0.0)
        inertia_target = m.inertia_target();
    const auto s = [&](int i, int j) {
        return s_entry(r.at(i, j), m.mass(i), m.mass(j), mult.delta);
    };
    const double w = mult.omega, th = mult.theta;
    Eigen::VectorXd f(13);
    f[0] = s(1, 2) + th;
    f[1] = s(1, 3) + 2.0 * r.at(4, 5) * w - th;
    f[2] = s(1, 4) - 2.0 * r.at(1, 4) * w;
    f[3] = s(1, 5) + 2.0 * r.at(1, 5) * w;
    f[4] = s(2, 3) + th;
    f[5] = s(2, 4);
    f[6] = s(2, 5);
    f[7] = s(3, 4) + 2.0 * r.at(3, 4) * w;
    f[8] = s(3, 5) - 2.0 * r.at(3, 5) * w;
    f[9] = s(4, 5) + 2.0 * r.at(1, 3) * w;
    f[10] = inertia(r, m) - inertia_target;
    f[11] = t2(r);
    f[12] = l123(r);
    return f;
}

// Analytic Jacobian of residual_system w.r.t. (r_packed, delta, omega, theta).
inline Eigen::MatrixXd residual_jacobian(const DistanceVector& r, const MultiplierSet& mult,
                                         const MassVector& m)
{
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(13, 13);
    const double w = mult.omega;
    for (int p = 0; p < 10; ++p) {
        const auto [i, j, lin] = pair_from_linear(p, 5);
        jac(p, p) = r_entry(r.at(i, j), m.mass(i), m.mass(j), mult.delta);
        jac(p, 10) = m.mass(i) * m.mass(j) * r.at(i, j);           // dS/d delta
        jac(10, p) = m.mass(i) * m.mass(j) * r.at(i, j) / m.total();  // dI/dr
    }
    const int i13 = pair_index(1, 3, 5).linear, i14 = pair_index(1, 4, 5).linear;
    const int i15 = pair_index(1, 5, 5).linear, i34 = pair_index(3, 4, 5).linear;
    const int i35 = pair_index(3, 5, 5).linear, i45 = pair_index(4, 5, 5).linear;
    const int i12 = pair_index(1, 2, 5).linear, i23 = pair_index(2, 3, 5).linear;

    jac(i13, i45) += 2.0 * w;
    jac(i13, 11) = 2.0 * r.at(4, 5);
    jac(i13, 12) = -1.0;
    jac(i14, i14) += -2.0 * w;
    jac(i14, 11) = -2.0 * r.at(1, 4);
    jac(i15, i15) += 2.0 * w;
    jac(i15, 11) = 2.0 * r.at(1, 5);
    jac(i34, i34) += 2.0 * w;
    jac(i34, 11) = 2.0 * r.at(3, 4);
    jac(i35, i35) += -2.0 * w;
    jac(i35, 11) = -2.0 * r.at(3, 5);
    jac(i45, i13) += 2.0 * w;
    jac(i45, 11) = 2.0 * r.at(1, 3);
    jac(i12, 12) = 1.0;
    jac(i23, 12) = 1.0;

    jac(11, i13) = 2.0 * r.at(4, 5);
    jac(11, i45) = 2.0 * r.at(1, 3);
    jac(11, i14) = -2.0 * r.at(1, 4);
    jac(11, i15) = 2.0 * r.at(1, 5);
    jac(11, i34) = 2.0 * r.at(3, 4);
    jac(11, i35) = -2.0 * r.at(3, 5);

    jac(12, i12) = 1.0;
    jac(12, i13) = -1.0;
    jac(12, i23) = 1.0;
    return jac;
}

// Hessian of W_245 in r at fixed multipliers: diagonal R entries, four of
// them shifted by +-2 omega, and one 2 omega coupling between the (1,3)
// and (4,5) slots.
inline Eigen::MatrixXd hessian_w245(const DistanceVector& r, double delta, double omega,
                                    const MassVector& m)
{
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(10, 10);
    for (int p = 0; p < 10; ++p) {
        const auto [i, j, lin] = pair_from_linear(p, 5);
        h(p, p) = r_entry(r.at(i, j), m.mass(i), m.mass(j), delta);
    }
    const int i13 = pair_index(1, 3, 5).linear, i45 = pair_index(4, 5, 5).linear;
    h(pair_index(1, 4, 5).linear, pair_index(1, 4, 5).linear) += -2.0 * omega;
    h(pair_index(1, 5, 5).linear, pair_index(1, 5, 5).linear) += 2.0 * omega;
    h(pair_index(3, 4, 5).linear, pair_index(3, 4, 5).linear) += 2.0 * omega;
    h(pair_index(3, 5, 5).linear, pair_index(3, 5, 5).linear) += -2.0 * omega;
    h(i13, i45) = h(i45, i13) = 2.0 * omega;
    return h;
}

// The ten eigenvalues of hessian_w245 in closed form; the (1,3)/(4,5)
// coupling block contributes the +-sqrt pair.
inline std::array<double, 10> spectrum_closed_form(const DistanceVector& r, double delta,
                                                   double omega, const MassVector& m)
{
    const auto rr = [&](int i, int j) { return r_entry(r.at(i, j), m.mass(i), m.mass(j), delta); };
    const double r13 = rr(1, 3), r45 = rr(4, 5);
    const double root = std::sqrt((r45 - r13) * (r45 - r13) + 16.0 * omega * omega);
    return {rr(1, 2),
            rr(2, 3),
            rr(2, 4),
            rr(2, 5),
            rr(1, 4) - 2.0 * omega,
            rr(1, 5) + 2.0 * omega,
            rr(3, 4) + 2.0 * omega,
            rr(3, 5) - 2.0 * omega,
            0.5 * (r13 + r45 + root),
            0.5 * (r13 + r45 - root)};
}

inline ClassificationFlags classify(const DistanceVector& r, const MultiplierSet& mult,
                                    const MassVector& m)
{
    ClassificationFlags flags;
    const double scale = r.max_entry();
    const double class_tol = 1e-9;
    const double chain_margin = 1e-8 * scale;

    flags.delta_positive = mult.delta > 0.0;
    if (!flags.delta_positive)
        flags.violations.push_back("delta > 0");
    flags.omega_positive = mult.omega > 0.0;
    if (!flags.omega_positive)
        flags.violations.push_back("omega > 0");
    flags.theta_positive = mult.theta > 0.0;
    if (!flags.theta_positive)
        flags.violations.push_back("theta > 0");

    const double r24 = r.at(2, 4), r25 = r.at(2, 5);
    const double iso = std::pow(mult.delta, -1.0 / 3.0);
    flags.r24_eq_r25 = mult.delta > 0.0 && std::abs(r24 - r25) < class_tol * scale &&
                       std::abs(r24 - iso) < class_tol * scale;
    if (!flags.r24_eq_r25)
        flags.violations.push_back("r24 = r25 = delta^(-1/3)");

    const double shorter =
        std::max({r.at(1, 2), r.at(2, 3), r.at(1, 5), r.at(3, 4), r.at(4, 5)});
    const double longer = std::min(r.at(1, 4), r.at(3, 5));
    flags.inequality_chain = shorter < r24 - chain_margin && r24 < longer - chain_margin;
    if (!flags.inequality_chain)
        flags.violations.push_back("0 < r12,r23,r15,r34,r45 < r24 = r25 < r14,r35");

    const auto zeta = spectrum_closed_form(r, mult.delta, mult.omega, m);
    flags.spectrum_positive = std::all_of(zeta.begin(), zeta.end(), [](double z) { return z > 0.0; });
    if (!flags.spectrum_positive)
        flags.violations.push_back("all ten Hessian eigenvalues zeta > 0");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        hessian_w245(r, mult.delta, mult.omega, m));
    std::array<double, 10> sorted_zeta = zeta;
    std::sort(sorted_zeta.begin(), sorted_zeta.end());
    double zmax = 0.0, worst = 0.0;
    for (double z : sorted_zeta)
        zmax = std::max(zmax, std::abs(z));
    for (int k = 0; k < 10; ++k)
        worst = std::max(worst, std::abs(sorted_zeta[static_cast<size_t>(k)] - es.eigenvalues()[k]));
    flags.spectrum_matches_numeric = worst < 1e-9 * std::max(zmax, 1e-300);
    if (!flags.spectrum_matches_numeric)
        flags.violations.push_back("closed-form spectrum matches eigensolver");
    return flags;
}

namespace detail {

// Mirror relabelling 1<->3, 4<->5 (reflection of the trapezoid); fixes the
// diagonal convention r14 <= r35 without changing the multipliers.
inline DistanceVector mirror_distances(const DistanceVector& r)
{
    Eigen::VectorXd q(10);
    const auto set = [&](int i, int j, double v) { q[pair_index(i, j, 5).linear] = v; };
    set(1, 2, r.at(2, 3));
    set(1, 3, r.at(1, 3));
    set(1, 4, r.at(3, 5));
    set(1, 5, r.at(3, 4));
    set(2, 3, r.at(1, 2));
    set(2, 4, r.at(2, 5));
    set(2, 5, r.at(2, 4));
    set(3, 4, r.at(1, 5));
    set(3, 5, r.at(1, 4));
    set(4, 5, r.at(4, 5));
    return {5, std::move(q)};
}

inline MassVector mirror_masses(const MassVector& m)
{
    return MassVector({m.mass(3), m.mass(2), m.mass(1), m.mass(5), m.mass(4)});
}

}  // namespace detail

// Symmetry classification per the sign analysis: a parallelogram limit is a
// rectangle with P2 at the midpoint; r13 < r45 forces the full symmetric
// constraint set (isosceles trapezoid, symmetric masses); r13 > r45 only
// yields the inequalities r12 <= r23, m1 <= m3, m4 >= m5.
inline SymmetryVerdict symmetry_analysis(const DistanceVector& r_in, const MassVector& m_in)
{
    SymmetryVerdict v;
    v.mirrored = r_in.at(1, 4) > r_in.at(3, 5);
    const DistanceVector r = v.mirrored ? detail::mirror_distances(r_in) : r_in;
    const MassVector m = v.mirrored ? detail::mirror_masses(m_in) : m_in;

    const double scale = r.max_entry();
    const double tol = 1e-8 * scale;
    const double mass_tol = 1e-8 * m.total();

    v.constraint_defects = {r.at(1, 2) - r.at(2, 3), r.at(1, 4) - r.at(3, 5),
                            r.at(1, 5) - r.at(3, 4), r.at(2, 4) - r.at(2, 5)};
    v.mass_defects = {m.mass(1) - m.mass(3), m.mass(4) - m.mass(5)};

    const double r13 = r.at(1, 3), r45 = r.at(4, 5);
    const auto check = [&](bool ok, const char* what) {
        if (!ok)
            v.violations.push_back(what);
    };

    if (std::abs(r13 - r45) < 1e-9 * scale) {
        v.cls = SymmetryClass::rectangle;
        check(std::abs(v.constraint_defects[1]) < tol, "rectangle: r14 = r35");
        check(std::abs(v.constraint_defects[2]) < tol, "rectangle: r15 = r34");
        check(std::abs(v.constraint_defects[0]) < tol, "rectangle: r12 = r23 (P2 at midpoint)");
    } else if (r13 < r45) {
        v.cls = SymmetryClass::symmetric_isosceles;
        check(std::abs(v.constraint_defects[0]) < tol, "symmetric: r12 = r23 = r13/2");
        check(std::abs(r.at(1, 2) - 0.5 * r13) < tol, "symmetric: r12 = r13/2");
        check(std::abs(v.constraint_defects[1]) < tol, "symmetric: r14 = r35");
        check(std::abs(v.constraint_defects[2]) < tol, "symmetric: r15 = r34");
        check(std::abs(v.constraint_defects[3]) < tol, "symmetric: r24 = r25");
        check(std::abs(v.mass_defects[0]) < mass_tol, "symmetric: m1 = m3");
        check(std::abs(v.mass_defects[1]) < mass_tol, "symmetric: m4 = m5");
    } else {
        v.cls = SymmetryClass::asymmetric_r13_gt_r45;
        check(r.at(1, 2) <= r.at(2, 3) + tol, "r13 > r45 branch: r12 <= r23");
        check(m.mass(1) <= m.mass(3) + mass_tol, "r13 > r45 branch: m1 <= m3");
        check(m.mass(4) >= m.mass(5) - mass_tol, "r13 > r45 branch: m4 >= m5");
    }
    if (!v.violations.empty())
        v.cls = SymmetryClass::violation;
    return v;
}

struct InitialGuess {
    DistanceVector r;
    MultiplierSet mult;
};

// Isosceles trapezoid P1=(-1,0), P2=(0,0), P3=(1,0), P4=(rho,h), P5=(-rho,h),
// scaled so I = I_target; delta = r24^-3 makes S_24 = S_25 = 0, and the
// remaining multipliers come from the stationarity rows for (1,2) and (1,4).
inline InitialGuess initial_guess_symmetric(const MassVector& m, double rho, double height,
                                            double inertia_target = -1.0, double p2_offset = 0.0)
{
    if (!(rho > 0.0) || !(height > 0.0))
        throw std::invalid_argument("initial_guess_symmetric: need rho > 0 and height > 0");
    if (inertia_target <= 0.0)
        inertia_target = m.inertia_target();
    PlanarConfiguration x{{{-1.0, 0.0},
                           {p2_offset, 0.0},
                           {1.0, 0.0},
                           {rho, height},
                           {-rho, height}}};
    DistanceVector r = distances_from_positions(x);
    const double s = std::sqrt(inertia_target / inertia(r, m));
    r = r.scaled(s);

    MultiplierSet mult;
    const double r24 = r.at(2, 4), r25 = r.at(2, 5);
    mult.delta = 0.5 * (1.0 / (r24 * r24 * r24) + 1.0 / (r25 * r25 * r25));
    mult.theta = -s_entry(r.at(1, 2), m.mass(1), m.mass(2), mult.delta);
    mult.omega = s_entry(r.at(1, 4), m.mass(1), m.mass(4), mult.delta) / (2.0 * r.at(1, 4));
    return {std::move(r), mult};
}

struct TrapezoidSolveOptions {
    double tol = 1e-12;
    int max_iter = 100;
    double inertia_target = -1.0;  // defaults to I_0 = 1/(2m)
};

struct CriticalPoint {
    DistanceVector r;
    MultiplierSet mult;
    double residual_norm = 0.0;
    int iterations = 0;
};

using CriticalPointResult = std::variant<CriticalPoint, SolveFailure>;

// Critical point of W_245 on M+_245 (constraints I, T_2, L only) without
// the realizability test. The iteration runs on the unit-total-mass problem
// (masses m/M, distances M r, multipliers delta/M^3, omega/M^5, theta/M^4)
// so the residual floor stays near machine epsilon for any mass scale; the
// solution maps back exactly by the same scaling. residual_norm is the
// normalized-system norm.
inline CriticalPointResult solve_m_plus_critical(const MassVector& m, const InitialGuess& guess,
                                                 const TrapezoidSolveOptions& opt = {})
{
    if (m.n() != 5 || guess.r.n() != 5)
        throw std::invalid_argument("solve_m_plus_critical: expects n = 5");
    const double target = opt.inertia_target > 0.0 ? opt.inertia_target : m.inertia_target();

    const double mass = m.total();
    std::vector<double> scaled = m.values();
    for (double& v : scaled)
        v /= mass;
    const MassVector mn(scaled);
    const double target_n = mass * target;
    const double m3 = mass * mass * mass, m4 = m3 * mass, m5 = m4 * mass;

    Eigen::VectorXd u(13);
    u.head(10) = guess.r.packed() * mass;
    u[10] = guess.mult.delta / m3;
    u[11] = guess.mult.omega / m5;
    u[12] = guess.mult.theta / m4;

    const auto unpack_r = [](const Eigen::VectorXd& v) {
        return DistanceVector(5, v.head(10));
    };
    const auto unpack_mult = [](const Eigen::VectorXd& v) {
        return MultiplierSet{v[10], v[11], v[12]};
    };

    const auto residual = [&](const Eigen::VectorXd& v) {
        return residual_system(unpack_r(v), unpack_mult(v), mn, target_n);
    };
    const auto jacobian = [&](const Eigen::VectorXd& v) {
        return residual_jacobian(unpack_r(v), unpack_mult(v), mn);
    };
    const auto admissible = [](const Eigen::VectorXd& v) {
        return (v.head(10).array() > 1e-12).all();
    };

    const auto out = damped_newton(u, residual, jacobian, admissible,
                                   {opt.tol, opt.max_iter, 30});
    if (out.singular)
        return SolveFailure{SolveFailure::Kind::singular_jacobian,
                            "Jacobian numerically singular", out.residual_norm, out.iterations};
    if (!out.converged)
        return SolveFailure{SolveFailure::Kind::non_convergence, "Newton did not converge",
                            out.residual_norm, out.iterations};

    return CriticalPoint{unpack_r(u).scaled(1.0 / mass),
                         MultiplierSet{u[10] * m3, u[11] * m5, u[12] * m4}, out.residual_norm,
                         out.iterations};
}

inline TrapezoidResult newton_solve(const MassVector& m, const InitialGuess& guess,
                                    const TrapezoidSolveOptions& opt = {})
{
    const double target = opt.inertia_target > 0.0 ? opt.inertia_target : m.inertia_target();
    auto crit = solve_m_plus_critical(m, guess, opt);
    if (std::holds_alternative<SolveFailure>(crit))
        return std::get<SolveFailure>(crit);
    auto& cp = std::get<CriticalPoint>(crit);

    // post-hoc membership: the converged point must lie in T_245, i.e. be a
    // realizable configuration, not merely a critical point of the reduced
    // Lagrangian on M+_245
    const auto member = membership(cp.r, m, target);
    if (!member.in_t) {
        std::string msg = "converged point is outside T_245";
        const auto real = is_realizable(cp.r);
        if (!real.realizable || !real.in_g2)
            for (const auto& viol : real.violations)
                msg += "; " + viol;
        const double rmax = cp.r.max_entry();
        const double k_scale = rmax * rmax * rmax;
        const double k2 = v2_k2(cp.r).k, k4 = v4_k4(cp.r).k, k5 = v5_k5(cp.r).k;
        if (std::abs(k4) > 1e-7 * k_scale || std::abs(k5) > 1e-7 * k_scale ||
            std::abs(k2) > 1e-7 * k_scale)
            msg += "; not realizable: K factors nonzero (K2=" + std::to_string(k2) +
                   ", K4=" + std::to_string(k4) + ", K5=" + std::to_string(k5) + ")";
        return SolveFailure{SolveFailure::Kind::invalid_region, msg, cp.residual_norm,
                            cp.iterations};
    }

    TrapezoidSolution sol{std::move(cp.r), cp.mult, cp.residual_norm, cp.iterations,
                          target,          {},      {},               {}};
    sol.spectrum = spectrum_closed_form(sol.r, sol.mult.delta, sol.mult.omega, m);
    sol.flags = classify(sol.r, sol.mult, m);
    sol.symmetry = symmetry_analysis(sol.r, m);
    return sol;
}

inline TrapezoidResult newton_solve(const MassVector& m, double rho = 0.5, double height = 1.0,
                                    const TrapezoidSolveOptions& opt = {})
{
    return newton_solve(m, initial_guess_symmetric(m, rho, height, opt.inertia_target), opt);
}

struct EtaReport {
    double eta3 = 0.0, eta4 = 0.0, eta5 = 0.0;
    std::array<double, 10> residuals = {};  // components of grad_r W-tilde
    double scale = 0.0;
    double max_residual = 0.0;
    bool all_vanish = false;
};

// Multipliers for the three 4-point Cayley-Menger constraints (bodies 3, 4
// and 5 deleted) that make grad_r W-tilde vanish at a central configuration.
// Slot-signed areas follow the deleted-column convention; the denominators
// are the areas of triangles (1,2,3), (1,2,4), (1,2,5).
inline EtaReport eta_multipliers(const PlanarConfiguration& x, const MassVector& m, double delta)
{
    if (x.n() != 5 || m.n() != 5)
        throw std::invalid_argument("eta_multipliers: expects n = 5");
    const DistanceVector r = distances_from_positions(x);
    const auto area = [&](int i, int j, int k) { return signed_area(x, i, j, k); };
    const auto s_over_r = [&](int i, int j) {
        return s_entry(r.at(i, j), m.mass(i), m.mass(j), delta) / r.at(i, j);
    };

    const double a123 = area(1, 2, 3), a124 = area(1, 2, 4), a125 = area(1, 2, 5);
    const double a134 = area(1, 3, 4), a135 = area(1, 3, 5), a145 = area(1, 4, 5);
    const double a234 = area(2, 3, 4), a235 = area(2, 3, 5), a245 = area(2, 4, 5);

    const double scale2 = std::pow(r.max_entry(), 4);
    if (std::abs(a124 * a123) < 1e-14 * scale2 || std::abs(a125 * a123) < 1e-14 * scale2 ||
        std::abs(a125 * a124) < 1e-14 * scale2)
        throw CollinearDegeneracy("eta_multipliers: a denominator triangle is collinear");

    EtaReport rep;
    // slot-signed: deleting column t multiplies the plain area by (-1)^{t+1}
    rep.eta5 = (1.0 / 64.0) * s_over_r(3, 4) / (a124 * -a123);
    rep.eta4 = (1.0 / 64.0) * s_over_r(3, 5) / (a125 * -a123);
    rep.eta3 = (1.0 / 64.0) * s_over_r(4, 5) / (a125 * -a124);

    const auto component = [&](int i, int j, std::initializer_list<std::array<double, 3>> terms) {
        double sum = s_entry(r.at(i, j), m.mass(i), m.mass(j), delta);
        double mag = std::abs(sum);
        for (const auto& t : terms) {
            const double val = -64.0 * r.at(i, j) * t[0] * t[1] * t[2];
            sum += val;
            mag = std::max(mag, std::abs(val));
        }
        rep.scale = std::max(rep.scale, mag);
        return sum;
    };

    rep.residuals[0] = component(1, 2, {{rep.eta5, a234, -a134},
                                        {rep.eta4, a235, -a135},
                                        {rep.eta3, a245, -a145}});
    rep.residuals[1] = component(1, 3, {{rep.eta5, a234, a124}, {rep.eta4, a235, a125}});
    rep.residuals[2] = component(1, 4, {{rep.eta5, a234, -a123}, {rep.eta3, a245, a125}});
    rep.residuals[3] = component(1, 5, {{rep.eta4, a235, -a123}, {rep.eta3, a245, -a124}});
    rep.residuals[4] = component(2, 3, {{rep.eta5, -a134, a124}, {rep.eta4, -a135, a125}});
    rep.residuals[5] = component(2, 4, {{rep.eta5, -a134, -a123}, {rep.eta3, -a145, a125}});
    rep.residuals[6] = component(2, 5, {{rep.eta4, -a135, -a123}, {rep.eta3, -a145, -a124}});
    rep.residuals[7] = component(3, 4, {{rep.eta5, a124, -a123}});
    rep.residuals[8] = component(3, 5, {{rep.eta4, a125, -a123}});
    rep.residuals[9] = component(4, 5, {{rep.eta3, a125, -a124}});

    for (double g : rep.residuals)
        rep.max_residual = std::max(rep.max_residual, std::abs(g));
    rep.all_vanish = rep.max_residual < 1e-8 * std::max(rep.scale, 1e-300);
    return rep;
}

struct UniquenessReport {
    int starts = 0;
    int converged = 0;
    int clusters = 0;
    std::vector<int> cluster_sizes;
    std::vector<TrapezoidSolution> representatives;
    std::string note;
};

// Multi-start probe of the at-most-one-solution claim: random feasible
// trapezoid shapes, each solved independently; converged solutions are
// clustered by distance-vector proximity.
inline UniquenessReport uniqueness_probe(const MassVector& m, int starts, uint64_t seed,
                                         const TrapezoidSolveOptions& opt = {})
{
    if (starts < 2)
        throw std::invalid_argument("uniqueness_probe: need starts >= 2");
    UniquenessReport rep;
    rep.starts = starts;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rho_dist(0.2, 0.9);
    std::uniform_real_distribution<double> h_dist(0.3, 3.0);
    std::uniform_real_distribution<double> off_dist(-0.8, 0.8);

    constexpr double cluster_tol = 1e-6;
    for (int k = 0; k < starts; ++k) {
        const double rho = rho_dist(rng);
        const double h = h_dist(rng);
        const double off = off_dist(rng);
        TrapezoidResult res =
            newton_solve(m, initial_guess_symmetric(m, rho, h, opt.inertia_target, off), opt);
        if (!converged(res))
            continue;
        const auto& sol = std::get<TrapezoidSolution>(res);
        ++rep.converged;
        bool matched = false;
        for (size_t c = 0; c < rep.representatives.size(); ++c) {
            const double dist =
                (rep.representatives[c].r.packed() - sol.r.packed()).lpNorm<Eigen::Infinity>();
            if (dist < cluster_tol) {
                ++rep.cluster_sizes[c];
                matched = true;
                break;
            }
        }
        if (!matched) {
            rep.representatives.push_back(sol);
            rep.cluster_sizes.push_back(1);
        }
    }
    rep.clusters = static_cast<int>(rep.representatives.size());
    if (rep.converged == 0)
        rep.note = "no solution found";
    return rep;
}

}  // namespace ccdist
