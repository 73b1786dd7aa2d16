#pragma once

// Test-side oracles and generators. Everything here is deliberately
// independent of the library code paths it is used to check.

#include "ccdist/distgeo.hpp"
#include "ccdist/energetics.hpp"
#include "ccdist/trapezoid.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace ccdist::testing {

// Bareiss fraction-free determinant over 64-bit integers; exact for the
// small matrices with small integer entries used as Cayley-Menger oracles.
inline long long bareiss_det(std::vector<std::vector<long long>> a)
{
    const size_t n = a.size();
    long long prev = 1;
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            size_t p = k + 1;
            while (p < n && a[p][k] == 0)
                ++p;
            if (p == n)
                return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

// Exact Cayley-Menger determinant for integer squared distances.
inline long long cm_exact(const std::vector<std::vector<long long>>& sq)
{
    const size_t k = sq.size();
    std::vector<std::vector<long long>> m(k + 1, std::vector<long long>(k + 1, 1));
    m[0][0] = 0;
    for (size_t a = 0; a < k; ++a)
        for (size_t b = 0; b < k; ++b)
            m[a + 1][b + 1] = sq[a][b];
    return bareiss_det(std::move(m));
}

// Central difference with Richardson extrapolation.
template <typename F>
double fd_derivative(F&& f, double x, double h)
{
    const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    const double d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

template <typename F>
double fd_second(F&& f, double x, double h)
{
    const auto d = [&](double hh) { return (f(x + hh) - 2.0 * f(x) + f(x - hh)) / (hh * hh); };
    return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

// P1=(-a,0), P2=(t,0), P3=(a,0), P4=(a rho, h), P5=(-a rho, h)
inline PlanarConfiguration trapezoid_points(double a, double rho, double h, double t = 0.0)
{
    return {{{-a, 0.0}, {t, 0.0}, {a, 0.0}, {a * rho, h}, {-a * rho, h}}};
}

inline PlanarConfiguration random_planar(std::mt19937_64& rng, int n, double min_sep = 0.15)
{
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    PlanarConfiguration x;
    x.points.resize(static_cast<size_t>(n));
    while (true) {
        for (auto& p : x.points)
            p = {coord(rng), coord(rng)};
        bool ok = true;
        for (int i = 1; i <= n && ok; ++i)
            for (int j = i + 1; j <= n && ok; ++j)
                if ((x.at(i) - x.at(j)).norm() < min_sep)
                    ok = false;
        if (ok)
            return x;
    }
}

inline DistanceVector random_positive_distances(std::mt19937_64& rng, int n, double lo = 0.1,
                                                double hi = 10.0)
{
    std::uniform_real_distribution<double> len(lo, hi);
    Eigen::VectorXd r(pair_count(n));
    for (int k = 0; k < r.size(); ++k)
        r[k] = len(rng);
    return {n, std::move(r)};
}

// K_4 at the M+ critical point of the symmetric trapezoid family
// (1, m2, 1, mu, mu), normalized by scale^3. Realizable solutions exist
// exactly at its zero.
inline double k4_defect(double m2, double mu, bool& converged_flag)
{
    const MassVector m({1.0, m2, 1.0, mu, mu});
    converged_flag = false;
    for (auto [rho, h] : {std::pair{1.16, 2.04}, {0.8, 1.5}, {1.3, 2.5}, {0.5, 1.0}}) {
        auto res = solve_m_plus_critical(m, initial_guess_symmetric(m, rho, h));
        if (std::holds_alternative<CriticalPoint>(res)) {
            converged_flag = true;
            const auto& cp = std::get<CriticalPoint>(res);
            const double s = cp.r.max_entry();
            return v4_k4(cp.r).k / (s * s * s);
        }
    }
    return 0.0;
}

// Bisection for the m4 = m5 value that makes the symmetric family
// realizable for a given m2. A geometric scan locates a sign change of the
// K_4 defect before bisecting.
inline double feasible_mu(double m2)
{
    bool ok = false;
    double lo = 0.0, hi = 0.0, flo = 0.0;
    double prev_mu = 0.0, prev_f = 0.0;
    bool have_prev = false;
    for (double mu = 1.5; mu <= 400.0; mu *= 1.6) {
        const double f = k4_defect(m2, mu, ok);
        if (!ok)
            continue;
        if (have_prev && prev_f * f <= 0.0) {
            lo = prev_mu;
            hi = mu;
            flo = prev_f;
            break;
        }
        prev_mu = mu;
        prev_f = f;
        have_prev = true;
    }
    if (hi == 0.0)
        throw std::runtime_error("feasible_mu: no sign change of the K_4 defect in [1.5, 400]");
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = k4_defect(m2, mid, ok);
        if (!ok)
            throw std::runtime_error("feasible_mu: critical-point solve failed during bisection");
        if (fm * flo <= 0.0)
            hi = mid;
        else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

inline MassVector feasible_masses(double m2)
{
    const double mu = feasible_mu(m2);
    return MassVector({1.0, m2, 1.0, mu, mu});
}

}  // namespace ccdist::testing
