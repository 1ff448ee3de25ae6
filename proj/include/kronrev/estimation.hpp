#pragma once

// Synthetic phasor data at measured nodes and a least-squares fit of Ybar.

#include <cstdint>

#include "kronrev/blockmat.hpp"

namespace kronrev {

struct MeasurementSet {
    int T = 0;
    DenseMatrix V1;  // T x 3M, row t is the voltage snapshot at time t
    DenseMatrix I1;  // T x 3M
    double noise_sigma = 0.0;

    int measured() const { return static_cast<int>(V1.cols() / 3); }
};

MeasurementSet simulate_measurements(const BlockMatrix& ybar, int T, double noise_sigma, uint64_t seed);

// Fits Ybar from I1(t) = Ybar V1(t), then symmetrizes and restores zero row-block sums.
BlockMatrix estimate_kron_reduced(const MeasurementSet& ms);

}  // namespace kronrev
