#pragma once

// Dense block matrices made of 3x3 complex phase blocks.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "kronrev/errors.hpp"

namespace kronrev {

using cplx = std::complex<double>;
using PhaseBlock = Eigen::Matrix3cd;
using DenseMatrix = Eigen::MatrixXcd;

struct Tolerances {
    double tau_sym = 1e-10;
    double tau_solve = 1e-9;
    double sigma_min = 1e-12;
    double tau_zero = 1e-9;
    double tol_gamma = 1e-6;
    double round_trip_tol = 1e-8;
};

class BlockMatrix {
public:
    BlockMatrix() = default;
    explicit BlockMatrix(int n) : m_(DenseMatrix::Zero(3 * n, 3 * n)) {}
    explicit BlockMatrix(DenseMatrix dense);

    static BlockMatrix identity(int n);

    int n() const { return static_cast<int>(m_.rows() / 3); }

    PhaseBlock block(int j, int k) const { return m_.block<3, 3>(3 * j, 3 * k); }
    auto blk(int j, int k) { return m_.block<3, 3>(3 * j, 3 * k); }
    auto blk(int j, int k) const { return m_.block<3, 3>(3 * j, 3 * k); }
    void set(int j, int k, const PhaseBlock& b) { m_.block<3, 3>(3 * j, 3 * k) = b; }

    const DenseMatrix& dense() const { return m_; }
    DenseMatrix& dense() { return m_; }

    double norm() const { return m_.norm(); }

    // Sub-matrix picking the given row and column block indices, in order.
    BlockMatrix sub(const std::vector<int>& rows, const std::vector<int>& cols) const;
    BlockMatrix sub(const std::vector<int>& nodes) const { return sub(nodes, nodes); }

    bool operator==(const BlockMatrix& o) const { return m_.rows() == o.m_.rows() && m_ == o.m_; }

private:
    DenseMatrix m_;
};

// perm[i] is the image of block index i.
class BlockPermutation {
public:
    BlockPermutation() = default;
    explicit BlockPermutation(std::vector<int> perm);

    static BlockPermutation identity(int n);

    int size() const { return static_cast<int>(p_.size()); }
    int operator()(int i) const { return p_[i]; }
    const std::vector<int>& map() const { return p_; }
    BlockPermutation inverse() const;
    // (this ∘ inner)(i) = this(inner(i))
    BlockPermutation compose(const BlockPermutation& inner) const;

    bool operator==(const BlockPermutation& o) const { return p_ == o.p_; }

private:
    std::vector<int> p_;
};

double rel_diff(const DenseMatrix& a, const DenseMatrix& b);
inline double rel_diff(const BlockMatrix& a, const BlockMatrix& b) { return rel_diff(a.dense(), b.dense()); }

bool is_symmetric_block(const PhaseBlock& b, double tol);
bool has_pd_real_part(const PhaseBlock& b);
PhaseBlock symmetrized(const PhaseBlock& b);

bool is_block_symmetric(const BlockMatrix& a, double tol);
// A = A^T entrywise; weaker than block symmetry when off-diagonal blocks are not symmetric.
bool is_complex_symmetric(const BlockMatrix& a, double tol);
bool has_zero_row_block_sums(const BlockMatrix& a, double tol);
PhaseBlock row_block_sum(const BlockMatrix& a, int j);

PhaseBlock invert_block(const PhaseBlock& b, double sigma_min = 1e-12);

BlockMatrix invert_principal_submatrix(const BlockMatrix& a, const std::vector<int>& nodes);

// A11 - A12 A22^{-1} A21 on the kept blocks, in the order given by keep.
BlockMatrix schur_complement(const BlockMatrix& a, const std::vector<int>& keep);

bool block_inverse_identities_check(const BlockMatrix& a, int split, double tol = 1e-9);

// result[i,j] = a[p^{-1}(i), p^{-1}(j)]
BlockMatrix apply_permutation(const BlockMatrix& a, const BlockPermutation& p);

BlockMatrix normalize_diagonal(const BlockMatrix& a);

// Dense inverse of a general square matrix; throws SingularSubmatrix when the
// reciprocal condition estimate drops below 1/kappa_max.
DenseMatrix checked_inverse(const DenseMatrix& m, double kappa_max = 1e12);

}  // namespace kronrev
