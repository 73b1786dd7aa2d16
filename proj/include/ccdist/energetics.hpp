#pragma once

// Newtonian potential, moment of inertia and the S/R derivative kernels in
// mutual-distance coordinates (G = 1 units). delta = lambda/m is the
// canonical inertia multiplier; lambda itself is never stored.

#include "ccdist/distgeo.hpp"

#include <numeric>
#include <stdexcept>
#include <vector>

namespace ccdist {

class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MassVector {
public:
    explicit MassVector(std::vector<double> masses) : m_(std::move(masses))
    {
        if (m_.size() < 2)
            throw std::invalid_argument("MassVector: need at least two bodies");
        for (double v : m_)
            if (!(v > 0.0))
                throw std::invalid_argument("mass must be positive");
        total_ = std::accumulate(m_.begin(), m_.end(), 0.0);
    }

    int n() const { return static_cast<int>(m_.size()); }
    double mass(int i) const { return m_[static_cast<size_t>(i - 1)]; }  // 1-based
    double total() const { return total_; }
    double inertia_target() const { return 1.0 / (2.0 * total_); }  // I_0 = 1/(2m)
    const std::vector<double>& values() const { return m_; }

private:
    std::vector<double> m_;
    double total_;
};

// U = sum_{i<j} m_i m_j / r_ij
inline double potential(const DistanceVector& r, const MassVector& m)
{
    if (r.n() != m.n())
        throw std::invalid_argument("potential: body count mismatch");
    double u = 0.0;
    for (int i = 1; i <= r.n(); ++i)
        for (int j = i + 1; j <= r.n(); ++j) {
            const double d = r.at(i, j);
            if (!(d > 0.0))
                throw SingularityError("potential: zero distance");
            u += m.mass(i) * m.mass(j) / d;
        }
    return u;
}

// I = (1/2m) sum_{i<j} m_i m_j r_ij^2
inline double inertia(const DistanceVector& r, const MassVector& m)
{
    if (r.n() != m.n())
        throw std::invalid_argument("inertia: body count mismatch");
    double s = 0.0;
    for (int i = 1; i <= r.n(); ++i)
        for (int j = i + 1; j <= r.n(); ++j)
            s += m.mass(i) * m.mass(j) * r.at(i, j) * r.at(i, j);
    return s / (2.0 * m.total());
}

// S_ij = m_i m_j r_ij (delta - r_ij^-3) = d(U + m delta I)/dr_ij
inline double s_entry(double r_ij, double m_i, double m_j, double delta)
{
    return m_i * m_j * r_ij * (delta - 1.0 / (r_ij * r_ij * r_ij));
}

// R_ij = m_i m_j (delta + 2/r_ij^3) = d^2(U + m delta I)/dr_ij^2
inline double r_entry(double r_ij, double m_i, double m_j, double delta)
{
    return m_i * m_j * (delta + 2.0 / (r_ij * r_ij * r_ij));
}

struct MultiplierSet {
    double delta = 0.0;  // lambda/m, inertia constraint
    double omega = 0.0;  // trapezoid constraint T_2
    double theta = 0.0;  // collinearity constraint L_{1,2,3}
};

}  // namespace ccdist
