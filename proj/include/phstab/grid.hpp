#pragma once

#include <vector>

#include <Eigen/Dense>

#include "phstab/bv_density.hpp"

namespace phstab {

/// Uniform nodal grid on [a, b] with trapezoid weights and per-node
/// cell-averaged density matrices. Cells are [z_j - h/2, z_j + h/2]
/// intersected with [a, b], so breakpoints never need to align with nodes.
struct SpatialGrid {
    int n = 0;        // cell count; n + 1 nodes
    int m = 0;        // matrix dimension
    double a = 0.0, b = 0.0, h = 0.0;
    std::vector<double> nodes;
    Eigen::VectorXd weights;                 // sigma = h * (1/2, 1, ..., 1, 1/2)
    std::vector<Eigen::MatrixXd> H;          // cell-averaged density per node
    std::vector<Eigen::MatrixXd> Hinv;       // inverses of the above

    static SpatialGrid build(const PiecewiseMatrixDensity& density, int n);
};

}  // namespace phstab
