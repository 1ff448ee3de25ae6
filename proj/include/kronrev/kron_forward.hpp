#pragma once

// Iterative Kron reduction that keeps the growing clique in the trailing blocks.
//
// Layout of A_hat at step l (block positions):
//   [ rest | y-neighbours of alpha (n_l) | clique body C11 | alpha ]
// with the clique C = [C11 c12; c12^T alpha] starting at clique_start.

#include <string>
#include <utility>
#include <vector>

#include "kronrev/blockmat.hpp"
#include "kronrev/network.hpp"

namespace kronrev {

struct NodeId {
    int label = 0;
    Role role = Role::Measured;

    bool operator==(const NodeId&) const = default;
};

struct KronState {
    int l = 0;
    BlockMatrix A_hat;
    int clique_start = 0;
    std::vector<PhaseBlock> y_stack;      // positive line admittances to alpha's non-clique neighbours
    std::vector<PhaseBlock> y_hat_stack;  // diagonal blocks of those neighbours (y - d)
    std::vector<int> y_labels;
    PhaseBlock alpha = PhaseBlock::Zero();
    BlockPermutation perm;  // A_hat position -> position in A^l (ascending label order)
    std::vector<NodeId> node_ids;

    int n_l() const { return static_cast<int>(y_stack.size()); }
    int y_start() const { return clique_start - n_l(); }
    int clique_size() const { return A_hat.n() - clique_start; }
    BlockMatrix clique() const;
    // A^l = P A_hat P^T
    BlockMatrix unpermuted() const { return apply_permutation(A_hat, perm); }
};

struct InvariantViolation {
    char check;  // 'a'..'f'
    std::string message;
};

BlockMatrix one_step_reduce(const BlockMatrix& a, int node);

struct ForwardResult {
    BlockMatrix reduced;  // A^k in ascending-label order of the kept blocks
    std::vector<int> kept;  // A0 indices of the kept blocks
    std::vector<KronState> trace;
};

// A connected elimination order of `hidden`: start at the lowest-index leaf of
// the hidden subgraph of G(A0) and walk breadth-first. Requires the hidden
// nodes to form one connected subtree.
std::vector<int> default_elimination_order(const BlockMatrix& a0, const std::vector<int>& hidden);

// Labels in the trace are A0 block indices. `hidden` is the elimination order;
// each node after the first must lie in the current clique.
ForwardResult iterative_reduce(const BlockMatrix& a0, const std::vector<int>& hidden, bool verify = true);

// Runs iterative_reduce once per connected hidden component. Accepts general
// trees: measured nodes need not be leaves, so check (d) is not enforced.
ForwardResult iterative_reduce_components(const BlockMatrix& a0, const std::vector<int>& hidden);

// Checks (a) zero upper-right block, (b) block-diagonal y-neighbour band,
// (c) blocks touching non-clique positions equal A0 under node_ids,
// (d) y_hat == y on measured rows, (e) n_l >= 2, (f) y/alpha bookkeeping
// matches A_hat. Labels in node_ids index A0.
std::vector<InvariantViolation> check_invariant_structure(const KronState& s, const BlockMatrix& a0,
                                                          double tol = 1e-9);

// Same checks without a reference matrix (skips (c)).
std::vector<InvariantViolation> check_invariant_layout(const KronState& s, double tol = 1e-9);

}  // namespace kronrev
