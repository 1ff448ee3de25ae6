#pragma once

// Sibling detection in a clique under uniform lines (gamma test).

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "kronrev/blockmat.hpp"

namespace kronrev {

struct SiblingGroup {
    std::vector<int> members;  // clique block indices, ascending
    std::map<std::pair<int, int>, PhaseBlock> gammas;
};

// gamma = C[i,m0] C[j,m0]^{-1} for the first m0 outside {i,j}; accepted when
// ||C[i,m] - gamma C[j,m]||_F <= tol ||C[i,m]||_F for every other m.
std::optional<PhaseBlock> gamma_fit(const BlockMatrix& c, int i, int j, double tol);

// Pairwise gamma test closed under union-find; groups whose members do not all
// pass pairwise are dropped. Sorted by smallest member. A 3-block clique always
// yields the single group of all three. Throws NoGroupFound when empty.
std::vector<SiblingGroup> find_sibling_groups(const BlockMatrix& c, double tol);

struct UniformFit {
    bool ok = false;
    Eigen::MatrixXd mu;  // fitted multiples; off-diagonal mu_jk > 0, diagonal sigma_j
    double worst_residual = 0.0;
};

// Every nonzero off-diagonal block must be -mu y_unit with mu > 0 and every
// diagonal block sigma y_unit with sigma >= sum of that row's mu.
UniformFit fit_uniform(const BlockMatrix& a, const PhaseBlock& y_unit, double tol, double zero_tol = 1e-9);
bool check_uniform_preservation(const BlockMatrix& a, const PhaseBlock& y_unit, double tol);

}  // namespace kronrev
