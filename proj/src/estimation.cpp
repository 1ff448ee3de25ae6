#include "kronrev/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace kronrev {

namespace {

constexpr double kPerturbation = 0.05;
constexpr int kMaxProjections = 500;
constexpr double kProjectionTol = 1e-15;

}  // namespace

MeasurementSet simulate_measurements(const BlockMatrix& ybar, int T, double noise_sigma, uint64_t seed) {
    if (T < 1) throw Error(ErrorKind::SizeMismatch, "need at least one sample");
    const int m = ybar.n();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-kPerturbation, kPerturbation);
    std::normal_distribution<double> g(0.0, 1.0);

    MeasurementSet ms;
    ms.T = T;
    ms.noise_sigma = noise_sigma;
    ms.V1.resize(T, 3 * m);
    for (int t = 0; t < T; ++t)
        for (int node = 0; node < m; ++node)
            for (int p = 0; p < 3; ++p) {
                const double re = u(rng), im = u(rng);
                const cplx rot = std::polar(1.0, -2.0 * std::numbers::pi * p / 3.0);
                ms.V1(t, 3 * node + p) = (1.0 + cplx(re, im)) * rot;
            }
    ms.I1 = ms.V1 * ybar.dense().transpose();
    if (noise_sigma > 0.0) {
        const double s = noise_sigma / std::sqrt(2.0);
        for (int t = 0; t < T; ++t)
            for (int c = 0; c < 3 * m; ++c) {
                const double re = g(rng), im = g(rng);
                ms.I1(t, c) += s * cplx(re, im);
            }
    }
    return ms;
}

BlockMatrix estimate_kron_reduced(const MeasurementSet& ms) {
    const int cols = static_cast<int>(ms.V1.cols());
    if (cols % 3 != 0 || ms.I1.rows() != ms.V1.rows() || ms.I1.cols() != cols)
        throw Error(ErrorKind::SizeMismatch, "V1 and I1 must both be T x 3M");
    if (ms.V1.rows() < cols)
        throw Error(ErrorKind::RankDeficient, "need at least 3M samples, got " + std::to_string(ms.V1.rows()));

    // V1 X = I1 with X = Ybar^T, solved by QR; near-balanced voltages make the normal equations lose digits.
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(ms.V1);
    if (qr.rank() < cols) throw Error(ErrorKind::RankDeficient, "voltage samples do not span all phases");
    const DenseMatrix x = qr.solve(ms.I1);

    // Alternate orthogonal projections onto the symmetric and the zero row-sum subspaces.
    BlockMatrix y(DenseMatrix(x.transpose()));
    const int m = y.n();
    for (int it = 0; it < kMaxProjections; ++it) {
        y.dense() = 0.5 * (y.dense() + y.dense().transpose()).eval();
        double drift = 0.0;
        for (int j = 0; j < m; ++j) {
            const PhaseBlock r = row_block_sum(y, j) / static_cast<double>(m);
            drift = std::max(drift, r.norm());
            for (int k = 0; k < m; ++k) y.blk(j, k) -= r;
        }
        if (drift <= kProjectionTol * std::max(1.0, y.norm())) break;
    }
    y.dense() = 0.5 * (y.dense() + y.dense().transpose()).eval();
    return normalize_diagonal(y);
}

}  // namespace kronrev
