#pragma once

// Radial three-phase networks: model, assumption checks, generators.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kronrev/blockmat.hpp"

namespace kronrev {

enum class Role { Measured, Hidden };

struct Node {
    int id = 0;
    Role role = Role::Measured;

    bool operator==(const Node&) const = default;
};

struct Edge {
    int j = 0;
    int k = 0;
    PhaseBlock y = PhaseBlock::Zero();
    std::optional<double> lambda;
};

struct RadialNetwork {
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::optional<PhaseBlock> y_unit;

    int size() const { return static_cast<int>(nodes.size()); }
    // Block index of a label in node order, or -1.
    int index_of(int label) const;
    std::vector<int> measured() const;
    std::vector<int> hidden() const;
    std::map<int, std::vector<int>> adjacency() const;
};

struct NodePartition {
    std::set<int> measured_internal;
    std::set<int> measured_boundary;
    std::set<int> hidden;

    bool operator==(const NodePartition&) const = default;
};

enum class ViolationKind { Structure, Tree, LineAdmittance, HiddenDegree, UniformLines };

struct Violation {
    ViolationKind kind;
    std::string message;
    std::optional<int> node;
    std::optional<std::pair<int, int>> edge;
};

std::string to_string(ViolationKind kind);

std::vector<Violation> validate(const RadialNetwork& net, double tau_sym = 1e-10);

// Y in node order. Throws ValidationFailed unless validate() is clean.
BlockMatrix admittance_from_network(const RadialNetwork& net);
// Same assembly without validation (used for intermediate, non-tree pieces).
BlockMatrix assemble_admittance(const RadialNetwork& net);

// Kron reduction onto measured nodes, ascending label order.
BlockMatrix kron_reduce_network(const RadialNetwork& net);

// Reads a network back from an admittance matrix; block i carries labels[i].
// Off-diagonal blocks with norm <= zero_tol * ||Y||_F are treated as absent.
RadialNetwork network_from_admittance(const BlockMatrix& y, const std::vector<int>& labels,
                                      const std::vector<Role>& roles, double zero_tol = 0.0);

NodePartition partition_of(const RadialNetwork& net);

// For each hidden node with >= 2 measured neighbours, the set of those neighbours.
std::vector<std::set<int>> measured_sibling_sets(const RadialNetwork& net);

// Symmetric complex block whose real part is positive definite (min eigenvalue >= 0.2).
PhaseBlock random_phase_block(std::mt19937_64& rng);

RadialNetwork generate_radial(int n_measured, int n_hidden, bool uniform, uint64_t seed);

struct MultiCliqueOptions {
    int cliques = 3;
    int max_nodes = 40;
    bool uniform = true;
};

// Several hidden subtrees joined by shared boundary nodes, boundary-to-boundary
// lines, and paths of internal measured nodes, plus extra internal subtrees.
RadialNetwork generate_multi_clique(const MultiCliqueOptions& opts, uint64_t seed);

// Largest relative edge-admittance error under the unique hidden relabeling
// fixing measured labels; nullopt when the topologies cannot be matched.
std::optional<double> relabeled_edge_error(const RadialNetwork& a, const RadialNetwork& b);

bool compare_up_to_hidden_relabeling(const RadialNetwork& a, const RadialNetwork& b, double tol);

}  // namespace kronrev
