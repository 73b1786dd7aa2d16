#pragma once

// Collinear n-body machinery: per-ordering stationarity solve in gap
// coordinates, Moulton enumeration over the n!/2 reflection-canonical
// orderings, and the Gamma / gamma / Psi apparatus that diagonalizes the
// inertia quadratic form in the r_1k coordinates.

#include "ccdist/distgeo.hpp"
#include "ccdist/energetics.hpp"
#include "ccdist/newton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <variant>
#include <vector>

namespace ccdist {

class EnumerationIncomplete : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Left-to-right body order along the line. Reflection-canonical form
// (first label < last label) deduplicates mirror images.
struct Ordering {
    std::vector<int> perm;  // 1-based body labels

    static Ordering identity(int n)
    {
        Ordering o;
        o.perm.resize(static_cast<size_t>(n));
        std::iota(o.perm.begin(), o.perm.end(), 1);
        return o;
    }

    int n() const { return static_cast<int>(perm.size()); }

    Ordering reversed() const
    {
        Ordering o = *this;
        std::reverse(o.perm.begin(), o.perm.end());
        return o;
    }

    Ordering canonical() const { return perm.front() < perm.back() ? *this : reversed(); }

    bool valid() const
    {
        std::vector<int> sorted = perm;
        std::sort(sorted.begin(), sorted.end());
        for (int k = 0; k < n(); ++k)
            if (sorted[static_cast<size_t>(k)] != k + 1)
                return false;
        return true;
    }
};

namespace detail {
// masses in slot order (slot = position along the line)
inline std::vector<double> slot_masses(const MassVector& m, const Ordering& ord)
{
    std::vector<double> mu(static_cast<size_t>(ord.n()));
    for (int k = 0; k < ord.n(); ++k)
        mu[static_cast<size_t>(k)] = m.mass(ord.perm[static_cast<size_t>(k)]);
    return mu;
}

inline Eigen::VectorXd slot_positions(const Eigen::VectorXd& gaps)
{
    Eigen::VectorXd x(gaps.size() + 1);
    x[0] = 0.0;
    for (Eigen::Index k = 0; k < gaps.size(); ++k)
        x[k + 1] = x[k] + gaps[k];
    return x;
}
}  // namespace detail

// The n per-body stationarity residuals sum_{i<j} S_ij - sum_{k>j} S_jk
// (slot indices) followed by the normalization defect I - I_0. The body
// residuals telescope to zero when summed.
inline Eigen::VectorXd residuals_collinear(const Eigen::VectorXd& gaps, double delta,
                                           const MassVector& m, const Ordering& ord)
{
    const int n = ord.n();
    if (m.n() != n || gaps.size() != n - 1)
        throw std::invalid_argument("residuals_collinear: size mismatch");
    const auto mu = detail::slot_masses(m, ord);
    const Eigen::VectorXd x = detail::slot_positions(gaps);

    Eigen::VectorXd f(n + 1);
    double inertia_sum = 0.0;
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < j; ++i)
            acc += s_entry(x[j] - x[i], mu[static_cast<size_t>(i)], mu[static_cast<size_t>(j)],
                           delta);
        for (int k = j + 1; k < n; ++k)
            acc -= s_entry(x[k] - x[j], mu[static_cast<size_t>(j)], mu[static_cast<size_t>(k)],
                           delta);
        f[j] = acc;
        for (int k = j + 1; k < n; ++k) {
            const double d = x[k] - x[j];
            inertia_sum += mu[static_cast<size_t>(j)] * mu[static_cast<size_t>(k)] * d * d;
        }
    }
    f[n] = inertia_sum / (2.0 * m.total()) - m.inertia_target();
    return f;
}

struct CollinearSolution {
    Ordering ordering;
    Eigen::VectorXd gaps;  // n-1 positive slot gaps
    double delta = 0.0;
    // sigma_ij = -S_ij over slot pairs 1 < i < j <= n, packed lexicographically
    Eigen::VectorXd sigma;
    double residual_norm = 0.0;
    int iterations = 0;
    Eigen::VectorXd spectrum;   // C(n,2) diagonal Hessian entries, slot pairs
    std::vector<int> s_signs;   // sign of S_ij per packed slot pair (diagnostic)
    bool delta_bracket_ok = false;

    // body-labelled mutual distances
    DistanceVector distances() const
    {
        const int n = ordering.n();
        const Eigen::VectorXd x = detail::slot_positions(gaps);
        Eigen::VectorXd slot_of(n + 1);
        std::vector<int> slot(static_cast<size_t>(n + 1));
        for (int k = 0; k < n; ++k)
            slot[static_cast<size_t>(ordering.perm[static_cast<size_t>(k)])] = k;
        Eigen::VectorXd r(pair_count(n));
        for (int a = 1; a <= n; ++a)
            for (int b = a + 1; b <= n; ++b)
                r[pair_index(a, b, n).linear] =
                    std::abs(x[slot[static_cast<size_t>(a)]] - x[slot[static_cast<size_t>(b)]]);
        return {n, std::move(r)};
    }
};

using CollinearResult = std::variant<CollinearSolution, SolveFailure>;

inline bool converged(const CollinearResult& res)
{
    return std::holds_alternative<CollinearSolution>(res);
}

// Diagonal Hessian entries m_i m_j (delta + 2 / r_ij^3) of the collinear
// Lagrangian, over packed pairs.
inline Eigen::VectorXd hessian_collinear(const DistanceVector& r, double delta,
                                         const MassVector& m)
{
    Eigen::VectorXd h(r.pairs());
    for (int p = 0; p < r.pairs(); ++p) {
        const auto [i, j, lin] = pair_from_linear(p, r.n());
        h[p] = r_entry(r.at(i, j), m.mass(i), m.mass(j), delta);
    }
    return h;
}

struct CollinearSolveOptions {
    double tol = 1e-12;
    int max_iter = 100;
    // overrides the uniform-gap initial guess when nonempty
    Eigen::VectorXd initial_gaps;
};

// Newton on (gaps, delta): the first n-1 body residuals (the n-th is the
// negative of their sum) plus the normalization I = I_0. Internally the
// masses are rescaled to unit total (gaps scale by M, delta by M^-3) so the
// residual floor is mass-scale independent.
inline CollinearResult solve_ordering(const MassVector& m, const Ordering& ord,
                                      const CollinearSolveOptions& opt = {})
{
    const int n = ord.n();
    if (!ord.valid() || m.n() != n)
        throw std::invalid_argument("solve_ordering: invalid ordering");

    const double mass = m.total();
    if (std::abs(mass - 1.0) > 1e-15) {
        std::vector<double> scaled = m.values();
        for (double& v : scaled)
            v /= mass;
        CollinearSolveOptions opt_n = opt;
        if (opt.initial_gaps.size() == n - 1)
            opt_n.initial_gaps = (mass * opt.initial_gaps).eval();
        auto res = solve_ordering(MassVector(scaled), ord, opt_n);
        if (!converged(res))
            return res;
        auto& sol = std::get<CollinearSolution>(res);
        const double m3 = mass * mass * mass;
        CollinearSolution out;
        out.ordering = sol.ordering;
        out.gaps = sol.gaps / mass;
        out.delta = sol.delta * m3;
        out.residual_norm = sol.residual_norm;
        out.iterations = sol.iterations;
        out.sigma = sol.sigma * m3 * mass;        // sigma = -S scales as M^4
        out.spectrum = sol.spectrum * m3 * mass * mass;  // R entries scale as M^5
        out.s_signs = sol.s_signs;
        out.delta_bracket_ok = sol.delta_bracket_ok;
        return out;
    }

    const auto mu = detail::slot_masses(m, ord);

    const auto square_residual = [&](const Eigen::VectorXd& u) {
        const Eigen::VectorXd full =
            residuals_collinear(u.head(n - 1), u[n - 1], m, ord);
        Eigen::VectorXd f(n);
        f.head(n - 1) = full.head(n - 1);
        f[n - 1] = full[n];
        return f;
    };

    const auto jacobian = [&](const Eigen::VectorXd& u) {
        const Eigen::VectorXd x = detail::slot_positions(u.head(n - 1));
        const double delta = u[n - 1];
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
        for (int j = 0; j < n - 1; ++j) {
            for (int i = 0; i < j; ++i) {
                const double d = x[j] - x[i];
                const double rij = r_entry(d, mu[static_cast<size_t>(i)],
                                           mu[static_cast<size_t>(j)], delta);
                for (int l = i; l < j; ++l)
                    jac(j, l) += rij;
                jac(j, n - 1) += mu[static_cast<size_t>(i)] * mu[static_cast<size_t>(j)] * d;
            }
            for (int k = j + 1; k < n; ++k) {
                const double d = x[k] - x[j];
                const double rjk = r_entry(d, mu[static_cast<size_t>(j)],
                                           mu[static_cast<size_t>(k)], delta);
                for (int l = j; l < k; ++l)
                    jac(j, l) -= rjk;
                jac(j, n - 1) -= mu[static_cast<size_t>(j)] * mu[static_cast<size_t>(k)] * d;
            }
        }
        for (int i = 0; i < n; ++i)
            for (int k = i + 1; k < n; ++k) {
                const double coeff =
                    mu[static_cast<size_t>(i)] * mu[static_cast<size_t>(k)] * (x[k] - x[i]);
                for (int l = i; l < k; ++l)
                    jac(n - 1, l) += coeff / m.total();
            }
        return jac;
    };

    const auto admissible = [&](const Eigen::VectorXd& u) {
        return (u.head(n - 1).array() > 1e-14).all();
    };

    // uniform gaps scaled to I = I_0; delta chosen to zero the first body
    // residual exactly
    Eigen::VectorXd u(n);
    if (opt.initial_gaps.size() == n - 1)
        u.head(n - 1) = opt.initial_gaps;
    else
        u.head(n - 1).setOnes();
    {
        DistanceVector r0 = [&] {
            const Eigen::VectorXd x = detail::slot_positions(u.head(n - 1));
            Eigen::VectorXd r(pair_count(n));
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    r[pair_index(i + 1, j + 1, n).linear] = x[j] - x[i];
            return DistanceVector(n, std::move(r));
        }();
        MassVector slot_m{mu};
        const double s = std::sqrt(m.inertia_target() / inertia(r0, slot_m));
        u.head(n - 1) *= s;
        const Eigen::VectorXd x = detail::slot_positions(u.head(n - 1));
        double num = 0.0, den = 0.0;
        for (int k = 1; k < n; ++k) {
            const double d = x[k];
            num += mu[0] * mu[static_cast<size_t>(k)] / (d * d);
            den += mu[0] * mu[static_cast<size_t>(k)] * d;
        }
        u[n - 1] = num / den;
    }

    const auto out = damped_newton(u, square_residual, jacobian, admissible,
                                   {opt.tol, opt.max_iter, 30});
    if (out.singular)
        return SolveFailure{SolveFailure::Kind::singular_jacobian,
                            "Jacobian numerically singular", out.residual_norm, out.iterations};
    if (!out.converged)
        return SolveFailure{SolveFailure::Kind::non_convergence, "Newton did not converge",
                            out.residual_norm, out.iterations};
    if (!(u.head(n - 1).array() > 0.0).all())
        return SolveFailure{SolveFailure::Kind::invalid_region, "converged gap <= 0",
                            out.residual_norm, out.iterations};

    CollinearSolution sol;
    sol.ordering = ord;
    sol.gaps = u.head(n - 1);
    sol.delta = u[n - 1];
    sol.residual_norm = out.residual_norm;
    sol.iterations = out.iterations;

    const Eigen::VectorXd x = detail::slot_positions(sol.gaps);
    sol.sigma.resize(pair_count(n - 1));
    int idx = 0;
    for (int i = 2; i <= n - 1; ++i)
        for (int j = i + 1; j <= n; ++j)
            sol.sigma[idx++] = -s_entry(x[j - 1] - x[i - 1], mu[static_cast<size_t>(i - 1)],
                                        mu[static_cast<size_t>(j - 1)], sol.delta);

    sol.spectrum.resize(pair_count(n));
    sol.s_signs.resize(static_cast<size_t>(pair_count(n)));
    for (int p = 0; p < pair_count(n); ++p) {
        const auto [i, j, lin] = pair_from_linear(p, n);
        const double d = x[j - 1] - x[i - 1];
        sol.spectrum[p] =
            r_entry(d, mu[static_cast<size_t>(i - 1)], mu[static_cast<size_t>(j - 1)], sol.delta);
        const double s =
            s_entry(d, mu[static_cast<size_t>(i - 1)], mu[static_cast<size_t>(j - 1)], sol.delta);
        sol.s_signs[static_cast<size_t>(p)] = (s > 0.0) - (s < 0.0);
    }

    // delta is pinned between 1/r_1n^3 and the cubes of the outermost gaps
    const double r1n = x[n - 1];
    const double upper = std::min(
        std::min(std::pow(x[1] - x[0], -3.0), std::pow(x[2] - x[1], -3.0)),
        std::min(std::pow(x[n - 2] - x[n - 3], -3.0), std::pow(x[n - 1] - x[n - 2], -3.0)));
    sol.delta_bracket_ok = sol.delta > std::pow(r1n, -3.0) && sol.delta < upper;
    return sol;
}

// Every reflection-canonical ordering solved; Moulton's count says exactly
// n!/2 solutions exist, so a single failure aborts the enumeration.
inline std::vector<CollinearSolution> moulton_enumerate(const MassVector& m,
                                                        const CollinearSolveOptions& opt = {})
{
    const int n = m.n();
    if (n > 8)
        throw std::invalid_argument("moulton_enumerate: n > 8 is out of desk range");
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<CollinearSolution> out;
    do {
        if (perm.front() > perm.back())
            continue;
        Ordering ord{perm};
        auto res = solve_ordering(m, ord, opt);
        if (!converged(res)) {
            std::string msg = "ordering";
            for (int b : perm)
                msg += " " + std::to_string(b);
            throw EnumerationIncomplete("moulton_enumerate: " + msg + " failed: " +
                                        std::get<SolveFailure>(res).message);
        }
        out.push_back(std::move(std::get<CollinearSolution>(res)));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

struct GammaFlags {
    bool diagonally_dominant = false;
    bool positive_definite = false;
    double min_eigenvalue = 0.0;
};

// (n-1)x(n-1) matrix of the inertia quadratic form in the r_1k coordinates:
// diagonal m_k(m - m_k), off-diagonal -m_j m_k, indices 2..n. Strict
// diagonal dominance margin is exactly m_1 m_k per row.
inline Eigen::MatrixXd gamma_matrix(const MassVector& m)
{
    const int n = m.n();
    Eigen::MatrixXd g(n - 1, n - 1);
    for (int j = 2; j <= n; ++j)
        for (int k = 2; k <= n; ++k)
            g(j - 2, k - 2) = (j == k) ? m.mass(j) * (m.total() - m.mass(j))
                                       : -m.mass(j) * m.mass(k);
    return g;
}

inline GammaFlags gamma_flags(const MassVector& m)
{
    const Eigen::MatrixXd g = gamma_matrix(m);
    GammaFlags flags;
    flags.diagonally_dominant = true;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            if (i != j)
                off += std::abs(g(i, j));
        if (!(g(i, i) > off))
            flags.diagonally_dominant = false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    flags.min_eigenvalue = es.eigenvalues().minCoeff();
    flags.positive_definite = flags.min_eigenvalue > 0.0;
    return flags;
}

// Pivots of the (pivot-free) symmetric elimination of Gamma, in closed
// form: gamma_k = m m_k (m - s_k) / (m - s_{k-1}) with s_k = m_2 + ... + m_k.
// The base case is gamma_2 = m_2 (m - m_2); all pivots are positive for
// positive masses. The rank-one off-diagonal structure of Gamma keeps the
// Schur complements in the same family, which is what makes the closed
// form exact.
inline std::vector<double> gamma_recursion(const MassVector& m)
{
    const int n = m.n();
    std::vector<double> gamma(static_cast<size_t>(n - 1));
    double s_prev = 0.0;
    for (int k = 2; k <= n; ++k) {
        const double s = s_prev + m.mass(k);
        const double g = m.total() * m.mass(k) * (m.total() - s) / (m.total() - s_prev);
        if (!(g > 0.0))
            throw std::runtime_error("gamma_recursion: non-positive pivot (should be impossible "
                                     "for positive masses)");
        gamma[static_cast<size_t>(k - 2)] = g;
        s_prev = s;
    }
    return gamma;
}

struct PsiPair {
    Eigen::MatrixXd psi;      // r_1k = Psi p
    Eigen::MatrixXd psi_inv;  // p = Psi^-1 r_1k, the completed-square rows
    double roundtrip_error = 0.0;
};

// p_k = sqrt(gamma_k) (r_1k - f_k) with f_k = sum_{j>k} m_j r_1j / (m - s_k),
// so Psi^-1 is upper triangular and Psi^-T Psi^-1 = Gamma. Psi comes from
// triangular back-substitution.
inline PsiPair psi_transform(const MassVector& m)
{
    const int n = m.n();
    const auto gamma = gamma_recursion(m);
    const auto g = [&](int k) { return gamma[static_cast<size_t>(k - 2)]; };

    PsiPair pair;
    pair.psi_inv = Eigen::MatrixXd::Zero(n - 1, n - 1);
    double s = 0.0;
    for (int k = 2; k <= n; ++k) {
        s += m.mass(k);
        pair.psi_inv(k - 2, k - 2) = std::sqrt(g(k));
        for (int j = k + 1; j <= n; ++j)
            pair.psi_inv(k - 2, j - 2) = -std::sqrt(g(k)) * m.mass(j) / (m.total() - s);
    }

    pair.psi = pair.psi_inv.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(n - 1, n - 1));
    pair.roundtrip_error =
        (pair.psi * pair.psi_inv - Eigen::MatrixXd::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff();
    return pair;
}

// p-coordinates of a solution: p = Psi^-1 (r_12, ..., r_1n)^T; on the unit
// sphere exactly when I = I_0.
inline Eigen::VectorXd p_coordinates(const CollinearSolution& sol, const MassVector& m)
{
    const Ordering& ord = sol.ordering;
    const auto mu = detail::slot_masses(m, ord);
    MassVector slot_m{mu};
    const Eigen::VectorXd x = detail::slot_positions(sol.gaps);
    const PsiPair pair = psi_transform(slot_m);
    return pair.psi_inv * x.tail(ord.n() - 1);
}

// Gradient of L_{i,j,k} = r_ij - r_ik + r_jk as a packed C(n,2) vector.
inline Eigen::VectorXd l_gradient(int n, std::array<int, 3> t)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(pair_count(n));
    v[pair_index(t[0], t[1], n).linear] = 1.0;
    v[pair_index(t[0], t[2], n).linear] = -1.0;
    v[pair_index(t[1], t[2], n).linear] = 1.0;
    return v;
}

}  // namespace ccdist
