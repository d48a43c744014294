#pragma once

#include <random>

#include "cczsg/complex_core.hpp"

namespace testsupport {

using cczsg::CMat;
using cczsg::CVec;
using cczsg::Complex;

inline CVec random_cvec(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
    return v;
}

inline CMat random_cmat(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    CMat a(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) a(i, j) = Complex(g(rng), g(rng));
    return a;
}

/// Random Hermitian PSD matrix G G^H.
inline CMat random_hpsd(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    const CMat g = random_cmat(rng, n, n, scale);
    CMat h = g * g.adjoint();
    return 0.5 * (h + h.adjoint());
}

}  // namespace testsupport
