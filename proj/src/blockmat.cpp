#include "kronrev/blockmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kronrev {

namespace {

constexpr double kKappaMax = 1e12;
constexpr double kDetFloor = 1e-8;

void require_square_blocks(const DenseMatrix& m) {
    if (m.rows() != m.cols() || m.rows() % 3 != 0)
        throw Error(ErrorKind::SizeMismatch, "dense matrix is not a square grid of 3x3 blocks");
}

std::vector<int> complement(int n, const std::vector<int>& nodes) {
    std::vector<char> in(n, 0);
    for (int i : nodes) {
        if (i < 0 || i >= n) throw Error(ErrorKind::SizeMismatch, "block index " + std::to_string(i) + " out of range");
        if (in[i]) throw Error(ErrorKind::InvalidSubset, "duplicate block index " + std::to_string(i));
        in[i] = 1;
    }
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (!in[i]) out.push_back(i);
    return out;
}

PhaseBlock adjugate(const PhaseBlock& b) {
    PhaseBlock adj;
    adj(0, 0) = b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1);
    adj(0, 1) = b(0, 2) * b(2, 1) - b(0, 1) * b(2, 2);
    adj(0, 2) = b(0, 1) * b(1, 2) - b(0, 2) * b(1, 1);
    adj(1, 0) = b(1, 2) * b(2, 0) - b(1, 0) * b(2, 2);
    adj(1, 1) = b(0, 0) * b(2, 2) - b(0, 2) * b(2, 0);
    adj(1, 2) = b(0, 2) * b(1, 0) - b(0, 0) * b(1, 2);
    adj(2, 0) = b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0);
    adj(2, 1) = b(0, 1) * b(2, 0) - b(0, 0) * b(2, 1);
    adj(2, 2) = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    return adj;
}

}  // namespace

BlockMatrix::BlockMatrix(DenseMatrix dense) : m_(std::move(dense)) { require_square_blocks(m_); }

BlockMatrix BlockMatrix::identity(int n) {
    return BlockMatrix(DenseMatrix::Identity(3 * n, 3 * n));
}

BlockMatrix BlockMatrix::sub(const std::vector<int>& rows, const std::vector<int>& cols) const {
    if (rows.size() != cols.size())
        throw Error(ErrorKind::SizeMismatch, "BlockMatrix::sub needs a square selection");
    BlockMatrix out(static_cast<int>(rows.size()));
    for (size_t a = 0; a < rows.size(); ++a)
        for (size_t b = 0; b < cols.size(); ++b)
            out.blk(static_cast<int>(a), static_cast<int>(b)) = blk(rows[a], cols[b]);
    return out;
}

BlockPermutation::BlockPermutation(std::vector<int> perm) : p_(std::move(perm)) {
    std::vector<char> seen(p_.size(), 0);
    for (int v : p_) {
        if (v < 0 || v >= static_cast<int>(p_.size()) || seen[v])
            throw Error(ErrorKind::SizeMismatch, "permutation is not a bijection");
        seen[v] = 1;
    }
}

BlockPermutation BlockPermutation::identity(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    return BlockPermutation(std::move(p));
}

BlockPermutation BlockPermutation::inverse() const {
    std::vector<int> q(p_.size());
    for (size_t i = 0; i < p_.size(); ++i) q[p_[i]] = static_cast<int>(i);
    return BlockPermutation(std::move(q));
}

BlockPermutation BlockPermutation::compose(const BlockPermutation& inner) const {
    if (inner.size() != size()) throw Error(ErrorKind::SizeMismatch, "permutation sizes differ");
    std::vector<int> q(p_.size());
    for (size_t i = 0; i < p_.size(); ++i) q[i] = p_[inner.p_[i]];
    return BlockPermutation(std::move(q));
}

double rel_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
    const double scale = std::max({1e-300, a.norm(), b.norm()});
    return (a - b).norm() / scale;
}

bool is_symmetric_block(const PhaseBlock& b, double tol) {
    return (b - b.transpose()).norm() <= tol * std::max(1e-300, b.norm());
}

bool has_pd_real_part(const PhaseBlock& b) {
    const Eigen::Matrix3d re = b.real();
    const Eigen::Matrix3d s = 0.5 * (re + re.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > 1e-10 * b.norm();
}

PhaseBlock symmetrized(const PhaseBlock& b) { return 0.5 * (b + b.transpose()); }

bool is_block_symmetric(const BlockMatrix& a, double tol) {
    const double bound = tol * std::max(1.0, a.norm());
    for (int j = 0; j < a.n(); ++j)
        for (int k = j + 1; k < a.n(); ++k)
            if ((a.blk(j, k) - a.blk(k, j)).norm() > bound) return false;
    return true;
}

bool is_complex_symmetric(const BlockMatrix& a, double tol) {
    return (a.dense() - a.dense().transpose()).norm() <= tol * std::max(1.0, a.norm());
}

PhaseBlock row_block_sum(const BlockMatrix& a, int j) {
    PhaseBlock s = PhaseBlock::Zero();
    for (int k = 0; k < a.n(); ++k) s += a.blk(j, k);
    return s;
}

bool has_zero_row_block_sums(const BlockMatrix& a, double tol) {
    const double bound = tol * std::max(1.0, a.norm());
    for (int j = 0; j < a.n(); ++j)
        if (row_block_sum(a, j).norm() > bound) return false;
    return true;
}

PhaseBlock invert_block(const PhaseBlock& b, double sigma_min) {
    if (!b.allFinite()) throw Error(ErrorKind::SingularBlock, "block has non-finite entries");
    Eigen::JacobiSVD<PhaseBlock> svd(b);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0 || sv(2) < sigma_min * sv(0) || sv(0) > kKappaMax * sv(2))
        throw Error(ErrorKind::SingularBlock, "3x3 block is numerically singular");
    const double bn = b.norm();
    const cplx det = b.determinant();
    if (std::abs(det) >= kDetFloor * bn * bn * bn) return adjugate(b) / det;
    return b.partialPivLu().inverse();
}

DenseMatrix checked_inverse(const DenseMatrix& m, double kappa_max) {
    if (m.rows() == 0) return m;
    Eigen::PartialPivLU<DenseMatrix> lu(m);
    const double rc = lu.rcond();
    if (!(rc > 1.0 / kappa_max)) throw Error(ErrorKind::SingularSubmatrix, "matrix is numerically singular");
    return lu.inverse();
}

BlockMatrix invert_principal_submatrix(const BlockMatrix& a, const std::vector<int>& nodes) {
    if (nodes.empty()) throw Error(ErrorKind::InvalidSubset, "empty node set");
    const auto rest = complement(a.n(), nodes);
    if (rest.empty()) throw Error(ErrorKind::InvalidSubset, "cannot invert the full admittance matrix");
    return BlockMatrix(checked_inverse(a.sub(nodes).dense(), kKappaMax));
}

BlockMatrix schur_complement(const BlockMatrix& a, const std::vector<int>& keep) {
    const auto elim = complement(a.n(), keep);
    const int nk = static_cast<int>(keep.size());
    const int ne = static_cast<int>(elim.size());
    DenseMatrix a11(3 * nk, 3 * nk), a12(3 * nk, 3 * ne), a21(3 * ne, 3 * nk), a22(3 * ne, 3 * ne);
    for (int i = 0; i < nk; ++i) {
        for (int j = 0; j < nk; ++j) a11.block<3, 3>(3 * i, 3 * j) = a.blk(keep[i], keep[j]);
        for (int j = 0; j < ne; ++j) a12.block<3, 3>(3 * i, 3 * j) = a.blk(keep[i], elim[j]);
    }
    for (int i = 0; i < ne; ++i) {
        for (int j = 0; j < nk; ++j) a21.block<3, 3>(3 * i, 3 * j) = a.blk(elim[i], keep[j]);
        for (int j = 0; j < ne; ++j) a22.block<3, 3>(3 * i, 3 * j) = a.blk(elim[i], elim[j]);
    }
    if (ne == 0) return BlockMatrix(a11);
    Eigen::PartialPivLU<DenseMatrix> lu(a22);
    if (!(lu.rcond() > 1.0 / kKappaMax))
        throw Error(ErrorKind::SingularSubmatrix, "eliminated block is numerically singular");
    return BlockMatrix(DenseMatrix(a11 - a12 * lu.solve(a21)));
}

bool block_inverse_identities_check(const BlockMatrix& a, int split, double tol) {
    const int n = a.n();
    if (split <= 0 || split >= n) throw Error(ErrorKind::InvalidSubset, "split must leave both parts nonempty");
    const int s = 3 * split, r = 3 * (n - split);
    const DenseMatrix& m = a.dense();
    const DenseMatrix a11 = m.topLeftCorner(s, s), a12 = m.topRightCorner(s, r);
    const DenseMatrix a21 = m.bottomLeftCorner(r, s), a22 = m.bottomRightCorner(r, r);

    const DenseMatrix a11i = checked_inverse(a11), a22i = checked_inverse(a22);
    const DenseMatrix s22i = checked_inverse(a11 - a12 * a22i * a21);  // (A/A22)^{-1}
    const DenseMatrix s11i = checked_inverse(a22 - a21 * a11i * a12);  // (A/A11)^{-1}

    DenseMatrix xa(s + r, s + r), xb(s + r, s + r);
    xa.topLeftCorner(s, s) = s22i;
    xa.topRightCorner(s, r) = -s22i * a12 * a22i;
    xa.bottomLeftCorner(r, s) = -a22i * a21 * s22i;
    xa.bottomRightCorner(r, r) = a22i + a22i * a21 * s22i * a12 * a22i;

    xb.topLeftCorner(s, s) = a11i + a11i * a12 * s11i * a21 * a11i;
    xb.topRightCorner(s, r) = -a11i * a12 * s11i;
    xb.bottomLeftCorner(r, s) = -s11i * a21 * a11i;
    xb.bottomRightCorner(r, r) = s11i;

    const DenseMatrix id = DenseMatrix::Identity(s + r, s + r);
    auto residual = [&](const DenseMatrix& x) { return (m * x - id).norm() / (m.norm() * x.norm()); };
    return rel_diff(xa, xb) <= tol && residual(xa) <= tol && residual(xb) <= tol;
}

BlockMatrix apply_permutation(const BlockMatrix& a, const BlockPermutation& p) {
    if (p.size() != a.n()) throw Error(ErrorKind::SizeMismatch, "permutation size does not match matrix");
    BlockMatrix out(a.n());
    for (int i = 0; i < a.n(); ++i)
        for (int j = 0; j < a.n(); ++j) out.blk(p(i), p(j)) = a.blk(i, j);
    return out;
}

BlockMatrix normalize_diagonal(const BlockMatrix& a) {
    BlockMatrix out = a;
    for (int j = 0; j < a.n(); ++j) {
        PhaseBlock off = PhaseBlock::Zero();
        for (int k = 0; k < a.n(); ++k)
            if (k != j) off += a.blk(j, k);
        out.blk(j, j) = -off;
    }
    return out;
}

}  // namespace kronrev
