#pragma once

// Independent reference solvers for real matrix games: a dense tableau simplex
// with Bland's rule, and vertex enumeration of small polytopes. Nothing here
// touches the conic machinery of the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace lporacle {

using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// max 1^T w s.t. P w <= 1, w >= 0 for entrywise positive P.
inline double packing_lp(const RMat& p) {
    const Eigen::Index m = p.rows(), n = p.cols();
    // Tableau rows: constraints [P | I | 1], last row: reduced costs [-1 | 0 | 0].
    RMat t = RMat::Zero(m + 1, n + m + 1);
    t.topLeftCorner(m, n) = p;
    t.block(0, n, m, m) = RMat::Identity(m, m);
    t.col(n + m).head(m).setOnes();
    t.row(m).head(n).setConstant(-1.0);
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;
    for (int iter = 0; iter < 10000; ++iter) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n + m; ++j)
            if (t(m, j) < -1e-12) {
                enter = j;  // Bland: smallest improving index
                break;
            }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t(i, enter) <= 1e-12) continue;
            const double ratio = t(i, n + m) / t(i, enter);
            if (ratio < best - 1e-15 ||
                (std::fabs(ratio - best) <= 1e-15 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave < 0) return std::numeric_limits<double>::infinity();
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i)
            if (i != leave) t.row(i) -= t(i, enter) * t.row(leave);
        basis[static_cast<std::size_t>(leave)] = enter;
    }
    return t(m, n + m);
}

/// Value of max_x min_y x^T A y over probability simplices.
inline double matrix_game_value(const RMat& a) {
    const double shift = 1.0 - a.minCoeff();
    const RMat p = (a.array() + shift).matrix();
    // max_x min_j (x^T P)_j = 1 / max{1^T w : P w <= 1, w >= 0}.
    return 1.0 / packing_lp(p) - shift;
}

/// Vertices of {x >= 0, sum x = 1, G x <= h} in R^n by enumerating n-1 tight inequalities.
inline std::vector<RVec> simplex_polytope_vertices(const RMat& g, const RVec& h) {
    const Eigen::Index n = g.cols();
    const Eigen::Index k = g.rows() + n;
    RMat ineq(k, n);
    RVec rhs(k);
    ineq.topRows(g.rows()) = g;
    rhs.head(g.rows()) = h;
    ineq.bottomRows(n) = -RMat::Identity(n, n);
    rhs.tail(n).setZero();
    std::vector<RVec> out;
    // Iterate over all (n-1)-subsets of the k inequalities.
    std::vector<bool> mask(static_cast<std::size_t>(k), false);
    std::fill(mask.begin(), mask.begin() + (n - 1), true);
    do {
        RMat m(n, n);
        RVec r(n);
        m.row(0).setOnes();
        r(0) = 1.0;
        Eigen::Index row = 1;
        for (Eigen::Index i = 0; i < k; ++i)
            if (mask[static_cast<std::size_t>(i)]) {
                m.row(row) = ineq.row(i);
                r(row) = rhs(i);
                ++row;
            }
        Eigen::FullPivLU<RMat> lu(m);
        if (lu.rank() < n) continue;
        const RVec x = lu.solve(r);
        if (((ineq * x - rhs).array() > 1e-9).any()) continue;
        bool seen = false;
        for (const auto& v : out) seen = seen || (v - x).cwiseAbs().maxCoeff() < 1e-9;
        if (!seen) out.push_back(x);
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return out;
}

}  // namespace lporacle
