#pragma once

// Reverse iterative Kron reduction: rebuild a tree from one clique.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kronrev/blockmat.hpp"
#include "kronrev/kron_forward.hpp"
#include "kronrev/network.hpp"
#include "kronrev/sibling.hpp"

namespace kronrev {

// Given a1 = y1 - y1 a^{-1} y1, a2 = y2 - y2 a^{-1} y2, a3 = -y1 a^{-1} y2,
// recovers (y1, y2). Solves the Stein equation u - L u R = a1^{-1}(I + R) for
// u = y1^{-1} with L = a1^{-1} a3, R = a3 a2^{-1}; then y2^{-1} = (I + u a3) a2^{-1}.
std::pair<PhaseBlock, PhaseBlock> solve_pair(const PhaseBlock& a1, const PhaseBlock& a2, const PhaseBlock& a3);

// y1 = (a1 a3^{-1} - a3 a2^{-1})(a2^{-1} + a3^{-1})^{-1}, y2 symmetric in (1,2).
// Exact only when the blocks commute (e.g. uniform lines).
std::pair<PhaseBlock, PhaseBlock> solve_pair_closed_form(const PhaseBlock& a1, const PhaseBlock& a2,
                                                         const PhaseBlock& a3);

PhaseBlock recover_alpha(const PhaseBlock& y1, const PhaseBlock& y2, const PhaseBlock& a3);

struct NeighborColumn {
    std::vector<PhaseBlock> y;
    std::vector<PhaseBlock> y_hat;
};

// M11 is the sibling-by-sibling block of the next clique, d the row sums of the
// siblings' couplings outside the clique. Blocks are symmetrized when their
// asymmetry is below tau_sym, otherwise AssumptionBreach.
NeighborColumn recover_neighbor_column(const BlockMatrix& m11, const std::vector<PhaseBlock>& d,
                                       const PhaseBlock& alpha, double tau_sym = 1e-10);

struct CliqueRemainder {
    std::vector<PhaseBlock> c12;
    BlockMatrix c11;
};

// C_next has the n_l siblings first; r = C_next[0, n_l:].
CliqueRemainder recover_clique_remainder(const BlockMatrix& c_next, const PhaseBlock& y1, const PhaseBlock& alpha,
                                         int n_l);

struct ReverseContext {
    std::vector<NodeId> node_ids;  // ids of A_hat_next positions
    int new_label = 0;
    int l = 0;
    double tau_sym = 1e-10;
};

// Undo one elimination. `siblings.members` index the clique (0 = clique_start).
// Output layout: [positions before clique_start | siblings | other clique nodes | new hidden].
KronState reverse_step(const BlockMatrix& A_hat_next, int clique_start, const SiblingGroup& siblings,
                       const ReverseContext& ctx);

using SiblingFinder = std::function<std::vector<SiblingGroup>(const BlockMatrix&, double)>;

struct IdentifyOptions {
    Tolerances tol;
    std::vector<int> labels;   // measured labels of the clique blocks (default 1..n)
    int first_hidden_label = 0;  // default n + 1
    SiblingFinder finder;      // default find_sibling_groups
    std::vector<KronState>* trace = nullptr;
};

RadialNetwork identify_clique(const BlockMatrix& ybar_clique, const IdentifyOptions& opt = {});

}  // namespace kronrev
