#pragma once

// Whole-network identification: classify G(Ybar), strip internal measured
// nodes, split into cliques, identify each, recombine, reattach.
//
// Block i of Ybar carries measured label i + 1 throughout.

#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kronrev/blockmat.hpp"
#include "kronrev/kron_reverse.hpp"
#include "kronrev/network.hpp"

namespace kronrev {

struct Disconnected {
    bool operator==(const Disconnected&) const = default;
};
struct AdjacentLine {
    int i = 0;  // label inside this piece
    int j = 0;  // label in an earlier piece
    PhaseBlock W12 = PhaseBlock::Zero();
    bool operator==(const AdjacentLine& o) const { return i == o.i && j == o.j && W12 == o.W12; }
};
struct SharedNode {
    int label = 0;
    bool operator==(const SharedNode&) const = default;
};
using Attachment = std::variant<Disconnected, AdjacentLine, SharedNode>;

std::string describe(const Attachment& a);

struct CliquePiece {
    std::vector<int> members;  // ascending labels
    BlockMatrix Ybar_iso;
    // Links to pieces extracted earlier; a single Disconnected entry when there are none.
    std::vector<Attachment> attachments;
};

struct Classification {
    NodePartition partition;
    std::vector<std::vector<int>> cliques;      // ascending labels, sorted by smallest member
    std::vector<std::pair<int, int>> tree_edges;  // edges of G(Ybar) in no clique
};

struct Stripped {
    std::vector<int> internal;  // labels
    std::vector<int> boundary;  // labels
    BlockMatrix Y11_11;
    DenseMatrix Y11_12;  // internal x boundary, 3x3 blocks
    BlockMatrix Ybar_prime;
};

// Labeled admittance matrix (block i <-> labels[i]).
struct LabeledMatrix {
    std::vector<int> labels;
    std::vector<Role> roles;
    BlockMatrix Y;
};

struct DecompositionPlan {
    NodePartition partition;
    Stripped stripped;  // carries Y11_11, Y11_12 and Ybar'
    std::vector<CliquePiece> pieces;
    std::vector<std::vector<std::pair<int, int>>> trees;  // maximal subtrees of measured nodes, as edge lists
};

// Adjacency of G(A): |A[i,j]|_F > zero_tol * ||A||_F.
std::vector<std::vector<int>> block_graph(const BlockMatrix& a, double zero_tol);

Classification classify_from_reduction(const BlockMatrix& ybar, double zero_tol = 1e-9);

Stripped strip_internal(const BlockMatrix& ybar, const NodePartition& part);

// `labels` names the blocks of ybar_prime (default 1..n).
std::vector<CliquePiece> split_cliques(const BlockMatrix& ybar_prime, const std::vector<int>& labels = {},
                                       double zero_tol = 1e-9);

LabeledMatrix recombine_matrices(const std::vector<std::pair<CliquePiece, LabeledMatrix>>& pieces);
LabeledMatrix recombine(const std::vector<std::pair<CliquePiece, RadialNetwork>>& pieces_identified);

LabeledMatrix reattach_internal(const LabeledMatrix& y_prime, const Stripped& stripped);

DecompositionPlan plan_decomposition(const BlockMatrix& ybar, double zero_tol = 1e-9);

struct IdentifyReport {
    RadialNetwork network;
    DecompositionPlan plan;
    double round_trip_error = 0.0;
};

IdentifyReport identify_full_report(const BlockMatrix& ybar, const Tolerances& tol = {});
RadialNetwork identify_full(const BlockMatrix& ybar, const Tolerances& tol = {});

}  // namespace kronrev
