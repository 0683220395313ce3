#include "phstab/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace phstab {

SpatialGrid SpatialGrid::build(const PiecewiseMatrixDensity& density, int n) {
    if (n < 8) throw std::invalid_argument("SpatialGrid: need at least 8 cells");
    SpatialGrid g;
    g.n = n;
    g.m = density.dim();
    g.a = density.a();
    g.b = density.b();
    g.h = (g.b - g.a) / n;
    g.nodes.resize(n + 1);
    g.weights = Eigen::VectorXd::Constant(n + 1, g.h);
    g.weights(0) = g.weights(n) = 0.5 * g.h;
    g.H.resize(n + 1);
    g.Hinv.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        g.nodes[j] = g.a + j * g.h;
        const double lo = std::max(g.a, g.nodes[j] - 0.5 * g.h);
        const double hi = std::min(g.b, g.nodes[j] + 0.5 * g.h);
        g.H[j] = density.cell_average(lo, hi);
        g.Hinv[j] = g.H[j].inverse();
    }
    return g;
}

}  // namespace phstab
