#pragma once

// Pair indexing, Cayley-Menger determinants, oriented areas and
// geometric-realizability predicates for configurations given by their
// mutual distances. Body indices are 1-based throughout, matching the
// usual r_ij notation; packed storage is lexicographic
// (1,2),(1,3),...,(n-1,n).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccdist {

class DegenerateConfiguration : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonRealizable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr int pair_count(int n) { return n * (n - 1) / 2; }

struct PairIndex {
    int i = 0;  // 1-based, i < j
    int j = 0;
    int linear = 0;  // offset into the packed length-C(n,2) sequence
};

inline PairIndex pair_index(int i, int j, int n)
{
    if (n < 2 || i < 1 || j <= i || j > n)
        throw std::out_of_range("pair_index: need 1 <= i < j <= n");
    const int linear = (i - 1) * (2 * n - i) / 2 + (j - i - 1);
    return {i, j, linear};
}

inline PairIndex pair_from_linear(int linear, int n)
{
    if (linear < 0 || linear >= pair_count(n))
        throw std::out_of_range("pair_from_linear: index outside 0..C(n,2)-1");
    int i = 1;
    int row = n - 1;  // pairs with first index i
    int k = linear;
    while (k >= row) {
        k -= row;
        --row;
        ++i;
    }
    return {i, i + 1 + k, linear};
}

// Packed vector of the C(n,2) mutual distances r_ij > 0.
class DistanceVector {
public:
    DistanceVector(int n, Eigen::VectorXd packed) : n_(n), r_(std::move(packed))
    {
        if (r_.size() != pair_count(n_))
            throw std::invalid_argument("DistanceVector: packed size must be C(n,2)");
        for (Eigen::Index k = 0; k < r_.size(); ++k)
            if (!(r_[k] > 0.0))
                throw std::invalid_argument("DistanceVector: distances must be positive");
    }

    int n() const { return n_; }
    int pairs() const { return static_cast<int>(r_.size()); }

    double at(int i, int j) const { return r_[pair_index(std::min(i, j), std::max(i, j), n_).linear]; }
    double operator[](int linear) const { return r_[linear]; }

    const Eigen::VectorXd& packed() const { return r_; }

    DistanceVector with_packed(const Eigen::VectorXd& packed) const { return {n_, packed}; }
    DistanceVector scaled(double s) const { return {n_, Eigen::VectorXd(s * r_)}; }

    double max_entry() const { return r_.maxCoeff(); }

private:
    int n_;
    Eigen::VectorXd r_;
};

struct PlanarConfiguration {
    std::vector<Eigen::Vector2d> points;

    int n() const { return static_cast<int>(points.size()); }
    const Eigen::Vector2d& at(int i) const { return points[static_cast<size_t>(i - 1)]; }
};

inline DistanceVector distances_from_positions(const PlanarConfiguration& x)
{
    const int n = x.n();
    Eigen::VectorXd r(pair_count(n));
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            const double d = (x.at(j) - x.at(i)).norm();
            if (!(d > 0.0))
                throw DegenerateConfiguration("coincident points " + std::to_string(i) + "," +
                                              std::to_string(j));
            r[pair_index(i, j, n).linear] = d;
        }
    }
    return {n, std::move(r)};
}

// Bordered (k+1)x(k+1) determinant of a k-point squared-distance matrix:
//
//   F_k = | 0  1    1   ...  1   |
//         | 1  0   d12  ... d1k  |
//         | 1 d12   0   ... d2k  |        F_k = (-1)^k 2^{k-1} ((k-1)!)^2 V_k^2
//         | .  .    .    .   .   |
//         | 1 d1k  d2k  ...  0   |
//
// computed by LU with partial pivoting; exact to machine precision for the
// small k used here.
inline double cayley_menger(const Eigen::MatrixXd& sq_dist)
{
    const Eigen::Index k = sq_dist.rows();
    if (k < 3 || sq_dist.cols() != k)
        throw std::invalid_argument("cayley_menger: need a kxk matrix with k >= 3");
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(k + 1, k + 1);
    m(0, 0) = 0.0;
    m.bottomRightCorner(k, k) = sq_dist;
    return Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant();
}

// Evaluated on unit-rescaled distances and mapped back through the degree-
// 2(k-1) homogeneity, so the relative round-off stays O(machine epsilon)
// regardless of the configuration scale.
inline double cayley_menger(const DistanceVector& r, std::span<const int> bodies)
{
    const int k = static_cast<int>(bodies.size());
    if (k < 3)
        throw std::invalid_argument("cayley_menger: need at least 3 bodies");
    double rmax = 0.0;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            rmax = std::max(rmax,
                            r.at(bodies[static_cast<size_t>(a)], bodies[static_cast<size_t>(b)]));
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(k, k);
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
            const double d =
                r.at(bodies[static_cast<size_t>(a)], bodies[static_cast<size_t>(b)]) / rmax;
            d2(a, b) = d2(b, a) = d * d;
        }
    }
    return std::pow(rmax, 2 * (k - 1)) * cayley_menger(d2);
}

inline double cayley_menger(const DistanceVector& r, std::initializer_list<int> bodies)
{
    return cayley_menger(r, std::span<const int>(bodies.begin(), bodies.size()));
}

inline double volume_from_cm(double f, int k)
{
    if (k < 3)
        throw std::invalid_argument("volume_from_cm: need k >= 3");
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    double fact = 1.0;
    for (int i = 2; i < k; ++i)
        fact *= i;
    const double denom = std::pow(2.0, k - 1) * fact * fact;
    const double v2 = sign * f / denom;
    if (v2 < 0.0)
        throw NonRealizable("volume_from_cm: (-1)^k F < 0");
    return std::sqrt(v2);
}

// Signed area of triangle (a,b,c), positive when anticlockwise.
inline double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                          const Eigen::Vector2d& c)
{
    return 0.5 * ((a.x() - c.x()) * (b.y() - c.y()) - (a.y() - c.y()) * (b.x() - c.x()));
}

inline double signed_area(const PlanarConfiguration& x, int i, int j, int k)
{
    return signed_area(x.at(i), x.at(j), x.at(k));
}

struct OrientedArea {
    double value = 0.0;
    std::array<int, 3> triple = {0, 0, 0};
    int slot = 0;  // column t of the deleted body; sign factor is (-1)^{t+1}
};

// Oriented area of the triangle left after deleting one body from a
// 4-tuple, with the minor sign (-1)^{t+1} of the deleted column t.
inline OrientedArea oriented_area(const PlanarConfiguration& x, std::array<int, 3> triple, int slot)
{
    const double sign = (slot % 2 == 1) ? 1.0 : -1.0;
    return {sign * signed_area(x, triple[0], triple[1], triple[2]), triple, slot};
}

// dF_4/dr_ij = -64 r_ij D_i D_j, with D_i, D_j the slot-signed areas of the
// two triangles obtained by deleting body i (resp. j) from the quadruple.
inline double cm_gradient_entry(double r_ij, const OrientedArea& area_i, const OrientedArea& area_j)
{
    return -64.0 * r_ij * area_i.value * area_j.value;
}

inline double cm_gradient_entry(double r_ij, double slot_signed_area_i, double slot_signed_area_j)
{
    return -64.0 * r_ij * slot_signed_area_i * slot_signed_area_j;
}

struct RealizabilityReport {
    bool realizable = false;  // r in G: triangle inequalities and F_5 <= 0
    bool in_g2 = false;       // strict inequalities over {1,3,4,5} and F_4(1,3,4,5) >= 0
    double f5 = 0.0;
    double f4_1345 = 0.0;
    std::vector<std::string> violations;
};

// Membership in the geometrically-realizable set G (and the no-collinear-
// subtriple set G_2) for n = 5. Boundary cases get absolute slack scaled by
// the squared largest distance; F-determinants by their homogeneity degree.
inline RealizabilityReport is_realizable(const DistanceVector& r)
{
    if (r.n() != 5)
        throw std::invalid_argument("is_realizable: expects n = 5");
    RealizabilityReport rep;
    const double rmax = r.max_entry();
    const double slack = 1e-10 * rmax * rmax;
    const double pow8 = std::pow(rmax, 8);
    const double pow6 = std::pow(rmax, 6);

    bool triangles_ok = true;
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j)
            for (int k = 1; k <= 5; ++k) {
                if (i == j || j == k || i == k)
                    continue;
                if (r.at(i, j) + r.at(j, k) < r.at(i, k) - slack) {
                    triangles_ok = false;
                    rep.violations.push_back("triangle inequality r_" + std::to_string(i) +
                                             std::to_string(j) + " + r_" + std::to_string(j) +
                                             std::to_string(k) + " >= r_" + std::to_string(i) +
                                             std::to_string(k));
                }
            }

    rep.f5 = cayley_menger(r, {1, 2, 3, 4, 5});
    const bool f5_ok = rep.f5 <= 1e-9 * pow8;
    if (!f5_ok)
        rep.violations.push_back("F_5(1,2,3,4,5) <= 0");
    rep.realizable = triangles_ok && f5_ok;

    bool strict_ok = true;
    const std::array<int, 4> quad = {1, 3, 4, 5};
    for (int a : quad)
        for (int b : quad)
            for (int c : quad) {
                if (a == b || b == c || a == c)
                    continue;
                if (!(r.at(a, b) + r.at(b, c) > r.at(a, c) + slack))
                    strict_ok = false;
            }
    rep.f4_1345 = cayley_menger(r, {1, 3, 4, 5});
    const bool f4_ok = rep.f4_1345 >= -1e-9 * pow6;
    if (!strict_ok)
        rep.violations.push_back("G_2: some triple of {1,3,4,5} is (near-)collinear");
    if (!f4_ok)
        rep.violations.push_back("G_2: F_4(1,3,4,5) >= 0");
    rep.in_g2 = strict_ok && f4_ok;
    return rep;
}

}  // namespace ccdist
