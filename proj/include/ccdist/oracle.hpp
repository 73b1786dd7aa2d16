#pragma once

// Position-space solver for the central-configuration equations and the
// identity fuzzers. Everything here deliberately avoids the distance-space
// code paths it is used to validate: forces are evaluated from coordinates,
// the Newton system is solved in (x, lambda) with explicit gauge fixing
// (center of mass at the origin, one direction pinned, I = I_0).

#include "ccdist/collinear.hpp"
#include "ccdist/constraints.hpp"
#include "ccdist/distgeo.hpp"
#include "ccdist/energetics.hpp"
#include "ccdist/newton.hpp"

#include <cmath>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace ccdist {

class ReconstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OracleSolution {
    PlanarConfiguration x;
    double lambda = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    std::string gauge;
    double per_body_residual_max = 0.0;  // worst |grad_j U + lambda m_j x_j|
    double force_scale = 0.0;            // largest per-body force magnitude
};

using OracleResult = std::variant<OracleSolution, SolveFailure>;

inline bool converged(const OracleResult& res)
{
    return std::holds_alternative<OracleSolution>(res);
}

struct OracleOptions {
    double tol = 1e-12;
    int max_iter = 200;
    int pin_a = 1;  // gauge: y(pin_b) - y(pin_a) = 0
    int pin_b = 3;
    double inertia_target = -1.0;
};

namespace detail {

inline Eigen::VectorXd pack_positions(const PlanarConfiguration& x, double lambda)
{
    Eigen::VectorXd u(2 * x.n() + 1);
    for (int i = 0; i < x.n(); ++i)
        u.segment<2>(2 * i) = x.points[static_cast<size_t>(i)];
    u[2 * x.n()] = lambda;
    return u;
}

inline PlanarConfiguration unpack_positions(const Eigen::VectorXd& u, int n)
{
    PlanarConfiguration x;
    x.points.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        x.points[static_cast<size_t>(i)] = u.segment<2>(2 * i);
    return x;
}

inline Eigen::Vector2d grad_u_body(const PlanarConfiguration& x, const MassVector& m, int j)
{
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int i = 1; i <= x.n(); ++i) {
        if (i == j)
            continue;
        const Eigen::Vector2d d = x.at(i) - x.at(j);
        const double r = d.norm();
        g += m.mass(i) * m.mass(j) * d / (r * r * r);
    }
    return g;
}

}  // namespace detail

// Gauss-Newton on the stacked system: 2n force-balance equations
// grad_j U + lambda m_j x_j = 0, two center-of-mass pins, one pinned
// direction and the normalization I = I_0. The system is consistent and
// overdetermined; column-pivoted QR supplies the step.
inline OracleResult solve_positions(const MassVector& m, const PlanarConfiguration& guess,
                                    const OracleOptions& opt = {})
{
    const int n = m.n();
    if (guess.n() != n)
        throw std::invalid_argument("solve_positions: body count mismatch");
    const double target = opt.inertia_target > 0.0 ? opt.inertia_target : m.inertia_target();

    // unit-total-mass rescale, as in the distance-space solvers
    const double mass = m.total();
    if (std::abs(mass - 1.0) > 1e-15) {
        std::vector<double> scaled = m.values();
        for (double& v : scaled)
            v /= mass;
        OracleOptions opt_n = opt;
        opt_n.inertia_target = mass * target;
        auto res = solve_positions(MassVector(scaled), guess, opt_n);
        if (!converged(res))
            return res;
        auto& sol = std::get<OracleSolution>(res);
        OracleSolution out = sol;
        for (auto& p : out.x.points)
            p /= mass;
        out.lambda = sol.lambda * mass * mass * mass * mass;
        out.per_body_residual_max = 0.0;
        out.force_scale = 0.0;
        for (int j = 1; j <= n; ++j) {
            const Eigen::Vector2d force = detail::grad_u_body(out.x, m, j);
            out.force_scale = std::max(out.force_scale, force.norm());
            out.per_body_residual_max =
                std::max(out.per_body_residual_max,
                         (force + out.lambda * m.mass(j) * out.x.at(j)).norm());
        }
        return out;
    }

    // normalize the guess: center, rotate the pinned direction onto +x,
    // rescale to the inertia target, seed lambda with U / (2 I)
    PlanarConfiguration x0 = guess;
    Eigen::Vector2d com = Eigen::Vector2d::Zero();
    for (int i = 1; i <= n; ++i)
        com += m.mass(i) * x0.at(i);
    com /= m.total();
    for (auto& p : x0.points)
        p -= com;
    const Eigen::Vector2d axis = x0.at(opt.pin_b) - x0.at(opt.pin_a);
    if (axis.norm() > 0.0) {
        const double c = axis.x() / axis.norm(), s = axis.y() / axis.norm();
        for (auto& p : x0.points)
            p = Eigen::Vector2d(c * p.x() + s * p.y(), -s * p.x() + c * p.y());
    }
    double moment = 0.0;
    for (int i = 1; i <= n; ++i)
        moment += m.mass(i) * x0.at(i).squaredNorm();
    moment *= 0.5;
    const double scale = std::sqrt(target / moment);
    for (auto& p : x0.points)
        p *= scale;
    const double u0 = potential(distances_from_positions(x0), m);
    Eigen::VectorXd u = detail::pack_positions(x0, u0 / (2.0 * target));

    const auto residual = [&](const Eigen::VectorXd& v) {
        const PlanarConfiguration x = detail::unpack_positions(v, n);
        const double lambda = v[2 * n];
        Eigen::VectorXd f(2 * n + 4);
        for (int j = 1; j <= n; ++j)
            f.segment<2>(2 * (j - 1)) =
                detail::grad_u_body(x, m, j) + lambda * m.mass(j) * x.at(j);
        Eigen::Vector2d com_f = Eigen::Vector2d::Zero();
        double moment_f = 0.0;
        for (int i = 1; i <= n; ++i) {
            com_f += m.mass(i) * x.at(i);
            moment_f += m.mass(i) * x.at(i).squaredNorm();
        }
        f.segment<2>(2 * n) = com_f;
        f[2 * n + 2] = x.at(opt.pin_b).y() - x.at(opt.pin_a).y();
        f[2 * n + 3] = 0.5 * moment_f - target;
        return f;
    };

    const auto jacobian = [&](const Eigen::VectorXd& v) {
        const PlanarConfiguration x = detail::unpack_positions(v, n);
        const double lambda = v[2 * n];
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * n + 4, 2 * n + 1);
        for (int j = 1; j <= n; ++j) {
            Eigen::Matrix2d diag = lambda * m.mass(j) * Eigen::Matrix2d::Identity();
            for (int i = 1; i <= n; ++i) {
                if (i == j)
                    continue;
                const Eigen::Vector2d d = x.at(i) - x.at(j);
                const double r = d.norm();
                const Eigen::Matrix2d block =
                    m.mass(i) * m.mass(j) *
                    (Eigen::Matrix2d::Identity() / (r * r * r) -
                     3.0 * d * d.transpose() / (r * r * r * r * r));
                jac.block<2, 2>(2 * (j - 1), 2 * (i - 1)) = block;
                diag -= block;
            }
            jac.block<2, 2>(2 * (j - 1), 2 * (j - 1)) = diag;
            jac.block<2, 1>(2 * (j - 1), 2 * n) = m.mass(j) * x.at(j);
        }
        for (int i = 1; i <= n; ++i) {
            jac(2 * n, 2 * (i - 1)) = m.mass(i);
            jac(2 * n + 1, 2 * (i - 1) + 1) = m.mass(i);
            jac.block<1, 2>(2 * n + 3, 2 * (i - 1)) = m.mass(i) * x.at(i).transpose();
        }
        jac(2 * n + 2, 2 * (opt.pin_a - 1) + 1) = -1.0;
        jac(2 * n + 2, 2 * (opt.pin_b - 1) + 1) = 1.0;
        return jac;
    };

    const auto admissible = [&](const Eigen::VectorXd& v) {
        const PlanarConfiguration x = detail::unpack_positions(v, n);
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j)
                if ((x.at(i) - x.at(j)).squaredNorm() < 1e-20)
                    return false;
        return true;
    };

    const auto out =
        damped_newton(u, residual, jacobian, admissible, {opt.tol, opt.max_iter, 30});
    if (out.singular)
        return SolveFailure{SolveFailure::Kind::singular_jacobian,
                            "Gauss-Newton normal system rank-deficient", out.residual_norm,
                            out.iterations};
    if (!out.converged)
        return SolveFailure{SolveFailure::Kind::non_convergence,
                            "position-space Newton did not converge", out.residual_norm,
                            out.iterations};

    OracleSolution sol;
    sol.x = detail::unpack_positions(u, n);
    sol.lambda = u[2 * n];
    sol.residual_norm = out.residual_norm;
    sol.iterations = out.iterations;
    sol.gauge = "com at origin, P" + std::to_string(opt.pin_a) + "->P" + std::to_string(opt.pin_b) +
                " along x, I = I_target";
    for (int j = 1; j <= n; ++j) {
        const Eigen::Vector2d force = detail::grad_u_body(sol.x, m, j);
        sol.force_scale = std::max(sol.force_scale, force.norm());
        sol.per_body_residual_max = std::max(
            sol.per_body_residual_max, (force + sol.lambda * m.mass(j) * sol.x.at(j)).norm());
    }
    return sol;
}

// Trilateration with P1 at the origin and P3 on the positive x axis; the
// other bodies go to the upper half-plane, matching the anticlockwise
// labelling. Fails if the distances are not realizable that way.
inline PlanarConfiguration reconstruct_positions(const DistanceVector& r)
{
    const int n = r.n();
    if (n < 3)
        throw std::invalid_argument("reconstruct_positions: need n >= 3");
    const double r13 = r.at(1, 3);
    PlanarConfiguration x;
    x.points.assign(static_cast<size_t>(n), Eigen::Vector2d::Zero());
    x.points[2] = {r13, 0.0};
    const double scale2 = r.max_entry() * r.max_entry();
    for (int k = 1; k <= n; ++k) {
        if (k == 1 || k == 3)
            continue;
        const double r1k = r.at(1, k), r3k = r.at(3, k);
        const double xc = (r1k * r1k + r13 * r13 - r3k * r3k) / (2.0 * r13);
        double y2 = r1k * r1k - xc * xc;
        if (y2 < -1e-9 * scale2)
            throw ReconstructionError("reconstruct_positions: body " + std::to_string(k) +
                                      " has no planar placement");
        // snap collinear bodies onto the axis: a round-off-level y^2 would
        // otherwise be amplified to sqrt(eps) by the square root
        if (y2 < 1e-12 * scale2)
            y2 = 0.0;
        x.points[static_cast<size_t>(k - 1)] = {xc, std::sqrt(y2)};
    }
    // all remaining pairwise distances must be consistent with the input
    const DistanceVector back = distances_from_positions(x);
    for (int p = 0; p < r.pairs(); ++p)
        if (std::abs(back[p] - r[p]) > 1e-7 * r.max_entry())
            throw ReconstructionError(
                "reconstruct_positions: distances are inconsistent with a planar placement");
    return x;
}

struct CrossValidation {
    double max_rel_distance_error = 0.0;
    OracleSolution oracle;
    PlanarConfiguration reconstructed;
};

// Rebuild positions from a distance-space solution, hand them to the
// position-space solver, and compare the distances it settles on.
inline CrossValidation cross_validate(const DistanceVector& sol_r, const MassVector& m,
                                      const OracleOptions& opt = {})
{
    CrossValidation cv;
    cv.reconstructed = reconstruct_positions(sol_r);
    OracleResult res = solve_positions(m, cv.reconstructed, opt);
    if (!converged(res))
        throw ReconstructionError("cross_validate: oracle failed to converge from the "
                                  "reconstruction: " +
                                  std::get<SolveFailure>(res).message);
    cv.oracle = std::get<OracleSolution>(res);
    const DistanceVector r_oracle = distances_from_positions(cv.oracle.x);
    for (int p = 0; p < sol_r.pairs(); ++p)
        cv.max_rel_distance_error = std::max(
            cv.max_rel_distance_error, std::abs(r_oracle[p] - sol_r[p]) / sol_r[p]);
    return cv;
}

// Euler's quintic for the collinear three-body problem, ordering 1,2,3 and
// rho = r_23 / r_12; its unique positive root fixes the configuration.
inline double euler_quintic_residual(double m1, double m2, double m3, double rho)
{
    if (!(rho > 0.0))
        throw std::invalid_argument("euler_quintic_residual: need rho > 0");
    return (m1 + m2) * std::pow(rho, 5) + (3.0 * m1 + 2.0 * m2) * std::pow(rho, 4) +
           (3.0 * m1 + m2) * std::pow(rho, 3) - (m2 + 3.0 * m3) * rho * rho -
           (2.0 * m2 + 3.0 * m3) * rho - (m2 + m3);
}

struct FuzzReport {
    uint64_t seed = 0;
    int trials = 0;
    int failures = 0;
    double worst_chain_rule = 0.0;
    double worst_area_identity = 0.0;
    double worst_sine_identity = 0.0;
    double worst_factorization = 0.0;
    std::vector<std::string> messages;
    bool pass = false;
};

namespace detail {

// Richardson-extrapolated central difference
template <typename F>
double fd_richardson(F&& f, double h)
{
    const double d1 = (f(h) - f(-h)) / (2.0 * h);
    const double d2 = (f(h / 2.0) - f(-h / 2.0)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

// grad_r of W-tilde = U + lambda (I - I_0) + eta5 F5 + eta4 F4 + eta3 F3 at
// a planar-realized point, with the d F / d r_ij entries expressed through
// the slot-signed areas.
inline Eigen::VectorXd grad_r_wtilde(const PlanarConfiguration& x, const MassVector& m,
                                     double lambda, double eta5, double eta4, double eta3)
{
    const DistanceVector r = distances_from_positions(x);
    Eigen::VectorXd g(10);
    const double delta = lambda / m.total();
    for (int p = 0; p < 10; ++p) {
        const auto [i, j, lin] = pair_from_linear(p, 5);
        g[p] = s_entry(r.at(i, j), m.mass(i), m.mass(j), delta);
    }
    const std::array<std::pair<double, std::array<int, 4>>, 3> cms = {
        {{eta5, {1, 2, 3, 4}}, {eta4, {1, 2, 3, 5}}, {eta3, {1, 2, 4, 5}}}};
    for (const auto& [eta, quad] : cms) {
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                const int i = quad[static_cast<size_t>(a)], j = quad[static_cast<size_t>(b)];
                std::array<int, 3> rem_i{}, rem_j{};
                int ri = 0, rj = 0;
                for (int q : quad) {
                    if (q != i)
                        rem_i[static_cast<size_t>(ri++)] = q;
                    if (q != j)
                        rem_j[static_cast<size_t>(rj++)] = q;
                }
                const OrientedArea ai = oriented_area(x, rem_i, a + 1);
                const OrientedArea aj = oriented_area(x, rem_j, b + 1);
                g[pair_index(i, j, 5).linear] += eta * cm_gradient_entry(r.at(i, j), ai, aj);
            }
    }
    return g;
}

}  // namespace detail

// Random-configuration fuzz of the identities everything else leans on:
// (a) chain-rule consistency of grad_x W-tilde against finite differences,
// (b) the oriented-area (Grassmann-Pluecker) identity, (c) the sine
// identity, (d) the Cayley-Menger factorizations. Every fifth sample puts
// P2 on segment P1P3 so collinear degeneracies are exercised too.
inline FuzzReport identity_fuzzer(uint64_t seed, int trials)
{
    if (trials < 1)
        throw std::invalid_argument("identity_fuzzer: need trials >= 1");
    FuzzReport rep;
    rep.seed = seed;
    rep.trials = trials;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    std::uniform_real_distribution<double> mass_dist(0.2, 3.0);
    std::uniform_real_distribution<double> mult_dist(-1.0, 1.0);
    std::uniform_real_distribution<double> len(0.1, 10.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

    const auto fail = [&](const std::string& what, int trial) {
        ++rep.failures;
        if (rep.messages.size() < 20)
            rep.messages.push_back(what + " at trial " + std::to_string(trial) + " (seed " +
                                   std::to_string(seed) + ")");
    };

    for (int t = 0; t < trials; ++t) {
        PlanarConfiguration x;
        x.points.resize(5);
        bool ok = false;
        while (!ok) {
            for (auto& p : x.points)
                p = {coord(rng), coord(rng)};
            if (t % 5 == 0) {
                // collinear triple: P2 on segment P1P3
                std::uniform_real_distribution<double> frac(0.2, 0.8);
                x.points[1] = x.points[0] + frac(rng) * (x.points[2] - x.points[0]);
            }
            ok = true;
            for (int i = 1; i <= 5 && ok; ++i)
                for (int j = i + 1; j <= 5 && ok; ++j)
                    if ((x.at(i) - x.at(j)).norm() < 0.15)
                        ok = false;
        }
        const DistanceVector r = distances_from_positions(x);
        const double rmax = r.max_entry();

        // (a) chain rule, evaluated on the unit-size copy of the sample so
        // the degree-8 determinant terms do not drown the difference
        // quotients in round-off
        {
            PlanarConfiguration xn = x;
            for (auto& p : xn.points)
                p /= rmax;
            const DistanceVector rn = distances_from_positions(xn);
            MassVector m({mass_dist(rng), mass_dist(rng), mass_dist(rng), mass_dist(rng),
                          mass_dist(rng)});
            const double lambda = mult_dist(rng);
            const double e5 = mult_dist(rng), e4 = mult_dist(rng), e3 = mult_dist(rng);
            const Eigen::VectorXd gr = detail::grad_r_wtilde(xn, m, lambda, e5, e4, e3);
            double worst = 0.0;
            for (int body = 1; body <= 5; ++body) {
                for (int c = 0; c < 2; ++c) {
                    const auto w_of = [&](double h) {
                        PlanarConfiguration xs = xn;
                        xs.points[static_cast<size_t>(body - 1)][c] += h;
                        const DistanceVector rs = distances_from_positions(xs);
                        double w = potential(rs, m) +
                                   lambda * (inertia(rs, m) - m.inertia_target());
                        w += e5 * cayley_menger(rs, {1, 2, 3, 4});
                        w += e4 * cayley_menger(rs, {1, 2, 3, 5});
                        w += e3 * cayley_menger(rs, {1, 2, 4, 5});
                        return w;
                    };
                    const double fd = detail::fd_richardson(w_of, 1e-6);
                    // analytic chain rule: sum over pairs containing `body`
                    double an = 0.0;
                    for (int other = 1; other <= 5; ++other) {
                        if (other == body)
                            continue;
                        const int i = std::min(body, other), j = std::max(body, other);
                        const Eigen::Vector2d d = xn.at(j) - xn.at(i);
                        const double sgn = (body == j) ? 1.0 : -1.0;
                        an += gr[pair_index(i, j, 5).linear] * sgn * d[c] / rn.at(i, j);
                    }
                    const double scale = std::max({std::abs(fd), std::abs(an), 1.0});
                    worst = std::max(worst, std::abs(fd - an) / scale);
                }
            }
            rep.worst_chain_rule = std::max(rep.worst_chain_rule, worst);
            if (worst > 1e-6)
                fail("chain rule", t);
        }

        // (b) oriented-area identity
        {
            const auto a = [&](int i, int j, int k) { return signed_area(x, i, j, k); };
            const double v = a(1, 2, 5) * a(1, 3, 4) - a(1, 2, 4) * a(1, 3, 5) +
                             a(1, 4, 5) * a(1, 2, 3);
            const double bound = 1e-12 * std::pow(rmax, 4);
            rep.worst_area_identity = std::max(rep.worst_area_identity, std::abs(v));
            if (std::abs(v) > bound)
                fail("oriented-area identity", t);
        }

        // (c) sine identity over random angles
        {
            const double al = angle(rng), be = angle(rng), ga = angle(rng);
            const double v = std::sin(al + be + ga) * std::sin(be) -
                             std::sin(al + be) * std::sin(be + ga) + std::sin(ga) * std::sin(al);
            rep.worst_sine_identity = std::max(rep.worst_sine_identity, std::abs(v));
            if (std::abs(v) > 1e-12)
                fail("sine identity", t);
        }

        // (d) factorizations on unconstrained positive vectors
        {
            Eigen::VectorXd rv(10);
            for (int k = 0; k < 10; ++k)
                rv[k] = len(rng);
            const DistanceVector q(5, rv);
            const double f2 = cayley_menger(q, {1, 3, 4, 5});
            const double f4 = cayley_menger(q, {1, 2, 3, 5});
            const double f5 = cayley_menger(q, {1, 2, 3, 4});
            const auto [vv2, kk2] = v2_k2(q);
            const auto [vv4, kk4] = v4_k4(q);
            const auto [vv5, kk5] = v5_k5(q);
            const double s = std::max({std::abs(f2), std::abs(f4), std::abs(f5), 1.0});
            const double worst =
                std::max({std::abs(f2 - (vv2 * t2(q) - 2.0 * kk2 * kk2)) / s,
                          std::abs(f4 - (vv4 * l123(q) - 2.0 * kk4 * kk4)) / s,
                          std::abs(f5 - (vv5 * l123(q) - 2.0 * kk5 * kk5)) / s});
            Eigen::Vector3d r3{len(rng), len(rng), len(rng)};
            const auto heron = heron_factorization(DistanceVector(3, r3));
            const double f3 = cayley_menger(DistanceVector(3, r3), {1, 2, 3});
            const double worst_h = std::abs(heron.residual) / std::max(std::abs(f3), 1.0);
            rep.worst_factorization = std::max({rep.worst_factorization, worst, worst_h});
            if (worst > 1e-10 || worst_h > 1e-10)
                fail("Cayley-Menger factorization", t);
        }
    }
    rep.pass = rep.failures == 0;
    return rep;
}

struct GridMinimum {
    double phi = 0.0;  // arc angle of the grid argmin
    double p2 = 0.0, p3 = 0.0;
    double u_min = 0.0;
    double cell_width = 0.0;
    double boundary_ratio = 0.0;  // U at feasibility-edge cells / interior min
    int feasible_cells = 0;
};

// Dense scan of U over the feasible arc of the (p2, p3) circle for n = 3
// (masses in line order). Independent of the Newton path: only the Psi map
// and the raw potential are evaluated.
inline GridMinimum brute_force_minimum(const MassVector& m, int grid = 10000)
{
    if (m.n() != 3)
        throw std::invalid_argument("brute_force_minimum: n = 3 only");
    const PsiPair psi = psi_transform(m);
    GridMinimum out;
    out.cell_width = M_PI / grid;
    out.u_min = std::numeric_limits<double>::infinity();
    double u_first = 0.0, u_last = 0.0;
    for (int k = 0; k < grid; ++k) {
        const double phi = (k + 0.5) * M_PI / grid;
        const Eigen::Vector2d p{std::cos(phi), std::sin(phi)};
        const Eigen::Vector2d r1k = psi.psi * p;  // (r_12, r_13)
        const double r12 = r1k[0], r13 = r1k[1], r23 = r13 - r12;
        if (!(r12 > 0.0) || !(r23 > 0.0) || !(r13 > 0.0))
            continue;
        const double u = m.mass(1) * m.mass(2) / r12 + m.mass(1) * m.mass(3) / r13 +
                         m.mass(2) * m.mass(3) / r23;
        if (out.feasible_cells == 0)
            u_first = u;
        u_last = u;
        ++out.feasible_cells;
        if (u < out.u_min) {
            out.u_min = u;
            out.phi = phi;
            out.p2 = p[0];
            out.p3 = p[1];
        }
    }
    if (out.feasible_cells == 0)
        throw std::runtime_error("brute_force_minimum: empty feasible arc");
    out.boundary_ratio = std::min(u_first, u_last) / out.u_min;
    return out;
}

}  // namespace ccdist
