#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrp/common.hpp"

namespace fdrp {

struct TimeGrid {
    std::vector<double> points;

    int size() const { return static_cast<int>(points.size()); }
    double front() const { return points.front(); }
    double back() const { return points.back(); }

    void validate() const {
        if (points.size() < 2)
            throw std::invalid_argument("time grid needs at least 2 points");
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (!std::isfinite(points[j]))
                throw std::invalid_argument("time grid contains a non-finite value");
            if (j > 0 && points[j] <= points[j - 1])
                throw std::invalid_argument("time grid must be strictly increasing");
        }
    }

    bool is_equispaced(double rel_tol = 1e-8) const {
        const int n = size();
        if (n < 3) return true;
        const double h = (points[n - 1] - points[0]) / (n - 1);
        for (int j = 1; j < n; ++j) {
            if (std::abs(points[j] - points[j - 1] - h) > rel_tol * std::abs(h))
                return false;
        }
        return true;
    }

    static TimeGrid equispaced(double lo, double hi, int n) {
        TimeGrid g;
        g.points.resize(n);
        for (int j = 0; j < n; ++j)
            g.points[j] = lo + (hi - lo) * static_cast<double>(j) / (n - 1);
        g.points.back() = hi;
        return g;
    }
};

// Row = one observed curve sampled on the shared grid.
struct CurveSet {
    Eigen::MatrixXd values;  // N x n
    TimeGrid grid;

    int num_curves() const { return static_cast<int>(values.rows()); }
    int num_points() const { return static_cast<int>(values.cols()); }

    void validate() const {
        grid.validate();
        if (values.rows() < 1) throw std::invalid_argument("curve set is empty");
        if (values.cols() != grid.size())
            throw std::invalid_argument("curve columns do not match grid length");
        if (!values.allFinite())
            throw std::invalid_argument("curve set contains missing or non-finite values");
    }
};

struct BasisSpec {
    int num_basis = 0;                  // K
    int order = 4;                      // cubic splines by default
    double lambda = 0.0;                // roughness penalty weight
    std::vector<double> interior_knots; // empty -> equispaced in the grid span

    void validate(const TimeGrid& grid) const {
        if (num_basis < order)
            throw std::invalid_argument("basis spec invalid: K must be >= order");
        if (order < 1) throw std::invalid_argument("basis spec invalid: order must be >= 1");
        if (lambda < 0.0) throw std::invalid_argument("basis spec invalid: lambda must be >= 0");
        if (!interior_knots.empty()) {
            if (static_cast<int>(interior_knots.size()) != num_basis - order)
                throw std::invalid_argument("basis spec invalid: need K - order interior knots");
            double prev = grid.front();
            for (double k : interior_knots) {
                if (k < prev || k > grid.back())
                    throw std::invalid_argument(
                        "basis spec invalid: interior knots must be non-decreasing inside the grid span");
                prev = k;
            }
        }
    }
};

namespace detail {

// Clamped knot vector: boundary knots repeated `order` times, interior knots
// equispaced unless the spec provides them. Length = K + order.
inline std::vector<double> knot_vector(const TimeGrid& grid, const BasisSpec& spec) {
    const int k = spec.num_basis;
    const int m = spec.order;
    const int n_interior = k - m;
    std::vector<double> knots(k + m);
    const double lo = grid.front();
    const double hi = grid.back();
    for (int i = 0; i < m; ++i) knots[i] = lo;
    if (spec.interior_knots.empty()) {
        for (int i = 0; i < n_interior; ++i)
            knots[m + i] = lo + (hi - lo) * static_cast<double>(i + 1) / (n_interior + 1);
    } else {
        std::copy(spec.interior_knots.begin(), spec.interior_knots.end(), knots.begin() + m);
    }
    for (int i = 0; i < m; ++i) knots[k + i] = hi;
    return knots;
}

// Largest span index i in [order-1, num_basis-1] with knots[i] <= t < knots[i+1];
// the right endpoint belongs to the last span.
inline int find_span(double t, int order, int num_basis, const std::vector<double>& knots) {
    if (t < knots[order - 1] || t > knots[num_basis])
        throw std::domain_error("evaluation point outside the knot span");
    if (t >= knots[num_basis]) return num_basis - 1;
    int lo = order - 1;
    int hi = num_basis;
    int mid = (lo + hi) / 2;
    while (t < knots[mid] || t >= knots[mid + 1]) {
        if (t < knots[mid])
            hi = mid;
        else
            lo = mid + 1;
        mid = (lo + hi) / 2;
    }
    return mid;
}

// Cox-de Boor recursion with derivatives (the banded "ders" variant).
// ders(r, j) receives the r-th derivative of basis function
// (span - order + 1 + j) at t, for j in [0, order).
inline void basis_ders(double t, int order, int span, const std::vector<double>& knots,
                       int n_ders, Eigen::MatrixXd& ders) {
    const int p = order - 1;  // degree
    Eigen::MatrixXd ndu(order, order);
    std::vector<double> left(order), right(order);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }
    ders.setZero(n_ders + 1, order);
    for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
    if (n_ders == 0) return;

    Eigen::MatrixXd a(2, order);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= n_ders; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            ders(k, r) = d;
            std::swap(s1, s2);
        }
    }
    double factor = static_cast<double>(p);
    for (int k = 1; k <= n_ders; ++k) {
        for (int j = 0; j <= p; ++j) ders(k, j) *= factor;
        factor *= static_cast<double>(p - k);
    }
}

// Gauss-Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

}  // namespace detail

// Design matrix Phi with Phi(j, k) = value of the k-th basis function at t_j.
// Each row sums to 1 and has at most `order` nonzero entries.
inline Eigen::MatrixXd design_matrix(const TimeGrid& grid, const BasisSpec& spec) {
    grid.validate();
    spec.validate(grid);
    const auto knots = detail::knot_vector(grid, spec);
    const int n = grid.size();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, spec.num_basis);
    Eigen::MatrixXd ders;
    for (int j = 0; j < n; ++j) {
        const int span = detail::find_span(grid.points[j], spec.order, spec.num_basis, knots);
        detail::basis_ders(grid.points[j], spec.order, span, knots, 0, ders);
        const int first = span - spec.order + 1;
        for (int r = 0; r < spec.order; ++r) phi(j, first + r) = ders(0, r);
    }
    return phi;
}

// Penalty matrix R(k, l) = integral of the product of second derivatives of
// basis functions k and l over the grid span. The integrand is piecewise
// polynomial of degree 2*(order-3), so (order-2)-point Gauss-Legendre per
// knot interval is exact.
inline Eigen::MatrixXd roughness_matrix(const BasisSpec& spec, const TimeGrid& grid) {
    grid.validate();
    spec.validate(grid);
    if (spec.order < 3)
        throw std::invalid_argument(
            "second-derivative penalty unsupported: order must be >= 3");
    const auto knots = detail::knot_vector(grid, spec);
    const int k = spec.num_basis;
    const int m = spec.order;
    const int n_quad = std::max(1, m - 2);
    std::vector<double> gx, gw;
    detail::gauss_legendre(n_quad, gx, gw);

    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd ders;
    for (int i = m - 1; i < k; ++i) {
        const double a = knots[i];
        const double b = knots[i + 1];
        if (b - a <= 0.0) continue;
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (int q = 0; q < n_quad; ++q) {
            const double t = mid + half * gx[q];
            const double wq = half * gw[q];
            const int span = detail::find_span(t, m, k, knots);
            detail::basis_ders(t, m, span, knots, 2, ders);
            const int first = span - m + 1;
            for (int u = 0; u < m; ++u) {
                const double du = ders(2, u);
                if (du == 0.0) continue;
                for (int v = 0; v <= u; ++v) {
                    r(first + u, first + v) += wq * du * ders(2, v);
                }
            }
        }
    }
    // mirror the lower triangle
    for (int u = 0; u < k; ++u)
        for (int v = u + 1; v < k; ++v) r(u, v) = r(v, u);
    return r;
}

}  // namespace fdrp
