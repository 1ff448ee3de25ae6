#include "kronrev/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kronrev {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Builds nodes/edges with measured 1..M then hidden M+1..; the caller supplies
// the abstract edge list over builder ids and a role per builder id.
RadialNetwork finalize(const std::vector<Role>& roles, const std::vector<std::pair<int, int>>& edges,
                       bool uniform, std::mt19937_64& rng) {
    std::vector<int> measured, hidden;
    for (int i = 0; i < static_cast<int>(roles.size()); ++i)
        (roles[i] == Role::Measured ? measured : hidden).push_back(i);
    std::shuffle(measured.begin(), measured.end(), rng);

    std::vector<int> label(roles.size());
    int next = 1;
    for (int i : measured) label[i] = next++;
    for (int i : hidden) label[i] = next++;

    RadialNetwork net;
    for (int l = 1; l < next; ++l)
        net.nodes.push_back({l, l <= static_cast<int>(measured.size()) ? Role::Measured : Role::Hidden});

    std::uniform_real_distribution<double> lam(0.5, 2.0);
    if (uniform) net.y_unit = random_phase_block(rng);
    for (auto [a, b] : edges) {
        Edge e;
        e.j = std::min(label[a], label[b]);
        e.k = std::max(label[a], label[b]);
        if (uniform) {
            e.lambda = lam(rng);
            e.y = *net.y_unit / *e.lambda;
        } else {
            e.y = random_phase_block(rng);
        }
        net.edges.push_back(e);
    }
    std::sort(net.edges.begin(), net.edges.end(),
              [](const Edge& x, const Edge& y) { return std::tie(x.j, x.k) < std::tie(y.j, y.k); });
    return net;
}

// Hidden subtree on `h` fresh hidden ids plus the measured leaves needed to
// give every hidden node degree >= 3, plus `extra` further leaves (or as many
// as reach `total_leaves` when that is set). Returns the new measured leaf ids.
std::vector<int> grow_clique_tree(int h, int extra, std::vector<Role>& roles,
                                  std::vector<std::pair<int, int>>& edges, std::mt19937_64& rng,
                                  int total_leaves = -1) {
    std::vector<int> hid;
    for (int i = 0; i < h; ++i) {
        hid.push_back(static_cast<int>(roles.size()));
        roles.push_back(Role::Hidden);
    }
    std::vector<int> hdeg(h, 0);
    // hidden degrees stay <= 3 so exactly h + 2 leaves are forced
    for (int i = 1; i < h; ++i) {
        std::vector<int> open;
        for (int q = 0; q < i; ++q)
            if (hdeg[q] < 3) open.push_back(q);
        const int p = open[uniform_int(rng, 0, static_cast<int>(open.size()) - 1)];
        edges.emplace_back(hid[p], hid[i]);
        ++hdeg[p];
        ++hdeg[i];
    }
    std::vector<int> leaves;
    auto add_leaf = [&](int parent) {
        const int id = static_cast<int>(roles.size());
        roles.push_back(Role::Measured);
        edges.emplace_back(parent, id);
        leaves.push_back(id);
    };
    for (int i = 0; i < h; ++i)
        for (int d = hdeg[i]; d < 3; ++d) add_leaf(hid[i]);
    if (total_leaves >= 0) extra = total_leaves - static_cast<int>(leaves.size());
    for (int e = 0; e < extra; ++e) add_leaf(hid[uniform_int(rng, 0, h - 1)]);
    return leaves;
}

}  // namespace

int RadialNetwork::index_of(int label) const {
    for (int i = 0; i < size(); ++i)
        if (nodes[i].id == label) return i;
    return -1;
}

std::vector<int> RadialNetwork::measured() const {
    std::vector<int> out;
    for (const auto& n : nodes)
        if (n.role == Role::Measured) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> RadialNetwork::hidden() const {
    std::vector<int> out;
    for (const auto& n : nodes)
        if (n.role == Role::Hidden) out.push_back(n.id);
    std::sort(out.begin(), out.end());
    return out;
}

std::map<int, std::vector<int>> RadialNetwork::adjacency() const {
    std::map<int, std::vector<int>> adj;
    for (const auto& n : nodes) adj[n.id];
    for (const auto& e : edges) {
        adj[e.j].push_back(e.k);
        adj[e.k].push_back(e.j);
    }
    for (auto& [_, v] : adj) std::sort(v.begin(), v.end());
    return adj;
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::Structure: return "Structure";
    case ViolationKind::Tree: return "NotATree";
    case ViolationKind::LineAdmittance: return "BadLineAdmittance";
    case ViolationKind::HiddenDegree: return "HiddenDegreeTooLow";
    case ViolationKind::UniformLines: return "NonUniformLines";
    }
    return "Unknown";
}

std::vector<Violation> validate(const RadialNetwork& net, double tau_sym) {
    std::vector<Violation> out;
    std::map<int, int> idx;
    for (int i = 0; i < net.size(); ++i) {
        if (!idx.emplace(net.nodes[i].id, i).second)
            out.push_back({ViolationKind::Structure, "duplicate node label " + std::to_string(net.nodes[i].id),
                           net.nodes[i].id, std::nullopt});
    }
    if (!out.empty()) return out;

    std::vector<int> degree(net.size(), 0);
    std::set<std::pair<int, int>> seen;
    bool endpoints_ok = true;
    for (const auto& e : net.edges) {
        const auto key = std::make_pair(std::min(e.j, e.k), std::max(e.j, e.k));
        const std::string tag = "(" + std::to_string(e.j) + "," + std::to_string(e.k) + ")";
        if (!idx.count(e.j) || !idx.count(e.k)) {
            out.push_back({ViolationKind::Structure, "edge " + tag + " references an unknown node", std::nullopt, key});
            endpoints_ok = false;
            continue;
        }
        if (e.j == e.k) {
            out.push_back({ViolationKind::Structure, "self loop at " + std::to_string(e.j), e.j, key});
            endpoints_ok = false;
            continue;
        }
        if (!seen.insert(key).second)
            out.push_back({ViolationKind::Structure, "duplicate edge " + tag, std::nullopt, key});
        ++degree[idx[e.j]];
        ++degree[idx[e.k]];

        if (!e.y.allFinite())
            out.push_back({ViolationKind::LineAdmittance, "edge " + tag + " has non-finite admittance", std::nullopt, key});
        else if (!is_symmetric_block(e.y, tau_sym))
            out.push_back({ViolationKind::LineAdmittance, "edge " + tag + " admittance is not symmetric", std::nullopt, key});
        else if (!has_pd_real_part(e.y))
            out.push_back({ViolationKind::LineAdmittance, "edge " + tag + " admittance real part is not positive definite",
                           std::nullopt, key});

        if (net.y_unit) {
            if (!e.lambda || !(*e.lambda > 0.0))
                out.push_back({ViolationKind::UniformLines, "edge " + tag + " lacks a positive line length", std::nullopt, key});
            else if ((e.y - *net.y_unit / *e.lambda).norm() > 1e-12 * e.y.norm())
                out.push_back({ViolationKind::UniformLines, "edge " + tag + " is not y_unit / lambda", std::nullopt, key});
        }
    }

    if (endpoints_ok) {
        if (static_cast<int>(net.edges.size()) != net.size() - 1)
            out.push_back({ViolationKind::Tree,
                           "edge count " + std::to_string(net.edges.size()) + " != node count - 1", std::nullopt,
                           std::nullopt});
        UnionFind uf(net.size());
        int components = net.size();
        for (const auto& e : net.edges)
            if (uf.unite(idx[e.j], idx[e.k])) --components;
        if (components > 1)
            out.push_back({ViolationKind::Tree, "graph is disconnected", std::nullopt, std::nullopt});
    }

    for (int i = 0; i < net.size(); ++i) {
        if (net.nodes[i].role == Role::Hidden && degree[i] < 3)
            out.push_back({ViolationKind::HiddenDegree,
                           "hidden node " + std::to_string(net.nodes[i].id) + " has degree " +
                               std::to_string(degree[i]) + " < 3",
                           net.nodes[i].id, std::nullopt});
    }
    return out;
}

BlockMatrix assemble_admittance(const RadialNetwork& net) {
    BlockMatrix y(net.size());
    for (const auto& e : net.edges) {
        const int a = net.index_of(e.j), b = net.index_of(e.k);
        if (a < 0 || b < 0) throw Error(ErrorKind::ValidationFailed, "edge references an unknown node");
        y.blk(a, b) -= e.y;
        y.blk(b, a) -= e.y;
        y.blk(a, a) += e.y;
        y.blk(b, b) += e.y;
    }
    return y;
}

BlockMatrix admittance_from_network(const RadialNetwork& net) {
    const auto v = validate(net);
    if (!v.empty()) throw Error(ErrorKind::ValidationFailed, to_string(v.front().kind) + ": " + v.front().message);
    return assemble_admittance(net);
}

BlockMatrix kron_reduce_network(const RadialNetwork& net) {
    const BlockMatrix y = admittance_from_network(net);
    std::vector<int> keep;
    for (int label : net.measured()) keep.push_back(net.index_of(label));
    return schur_complement(y, keep);
}

RadialNetwork network_from_admittance(const BlockMatrix& y, const std::vector<int>& labels,
                                      const std::vector<Role>& roles, double zero_tol) {
    if (static_cast<int>(labels.size()) != y.n() || roles.size() != labels.size())
        throw Error(ErrorKind::SizeMismatch, "labels/roles do not match matrix size");
    RadialNetwork net;
    for (int i = 0; i < y.n(); ++i) net.nodes.push_back({labels[i], roles[i]});
    const double floor = zero_tol * y.norm();
    for (int a = 0; a < y.n(); ++a)
        for (int b = a + 1; b < y.n(); ++b) {
            const PhaseBlock blk = y.block(a, b);
            if (blk.norm() <= floor || blk.isZero(0.0)) continue;
            net.edges.push_back({std::min(labels[a], labels[b]), std::max(labels[a], labels[b]), -blk, std::nullopt});
        }
    return net;
}

NodePartition partition_of(const RadialNetwork& net) {
    NodePartition p;
    const auto adj = net.adjacency();
    std::set<int> hidden;
    for (int h : net.hidden()) hidden.insert(h);
    p.hidden = hidden;
    for (int m : net.measured()) {
        bool boundary = false;
        for (int nb : adj.at(m)) boundary = boundary || hidden.count(nb);
        (boundary ? p.measured_boundary : p.measured_internal).insert(m);
    }
    return p;
}

std::vector<std::set<int>> measured_sibling_sets(const RadialNetwork& net) {
    const auto adj = net.adjacency();
    std::set<int> measured;
    for (int m : net.measured()) measured.insert(m);
    std::vector<std::set<int>> out;
    for (int h : net.hidden()) {
        std::set<int> s;
        for (int nb : adj.at(h))
            if (measured.count(nb)) s.insert(nb);
        if (s.size() >= 2) out.push_back(s);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
    return out;
}

PhaseBlock random_phase_block(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PhaseBlock b;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double re = u(rng);
            const double im = u(rng);
            b(i, j) = cplx(re, im);
        }
    PhaseBlock s = symmetrized(b);
    const Eigen::Matrix3d re = s.real();
    const double emin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(re, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    const double c = std::max(0.0, 0.2 - emin);
    s += c * PhaseBlock::Identity();
    return s;
}

RadialNetwork generate_radial(int n_measured, int n_hidden, bool uniform, uint64_t seed) {
    if (n_measured < 1 || n_hidden < 0)
        throw Error(ErrorKind::Infeasible, "need at least one measured node and a non-negative hidden count");
    if (n_hidden >= 1 && n_measured < n_hidden + 2)
        throw Error(ErrorKind::Infeasible, "hidden nodes need degree >= 3 with measured leaves, which requires "
                                           "measured >= hidden + 2 (got " +
                                               std::to_string(n_measured) + " measured, " +
                                               std::to_string(n_hidden) + " hidden)");
    std::mt19937_64 rng(seed);
    std::vector<Role> roles;
    std::vector<std::pair<int, int>> edges;
    if (n_hidden == 0) {
        for (int i = 0; i < n_measured; ++i) {
            roles.push_back(Role::Measured);
            if (i > 0) edges.emplace_back(uniform_int(rng, 0, i - 1), i);
        }
    } else {
        grow_clique_tree(n_hidden, 0, roles, edges, rng, n_measured);
    }
    return finalize(roles, edges, uniform, rng);
}

RadialNetwork generate_multi_clique(const MultiCliqueOptions& opts, uint64_t seed) {
    if (opts.cliques < 1 || opts.max_nodes < 4)
        throw Error(ErrorKind::Infeasible, "need at least one clique and room for a 3-leaf star");
    std::mt19937_64 rng(seed);
    std::vector<Role> roles;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> boundary;
    std::vector<int> measured_nodes;

    std::set<int> dropped;  // leaf ids merged into an existing node by shared-node joins
    auto live = [&]() { return static_cast<int>(roles.size()); };

    for (int c = 0; c < opts.cliques; ++c) {
        int h = uniform_int(rng, 1, 3);
        int extra = uniform_int(rng, 0, 2);
        const int reserve = 3;  // room for a joining path
        while (h > 1 && live() - static_cast<int>(dropped.size()) + 2 * h + 2 + extra + reserve > opts.max_nodes) --h;
        while (extra > 0 && live() - static_cast<int>(dropped.size()) + 2 * h + 2 + extra + reserve > opts.max_nodes) --extra;
        if (live() - static_cast<int>(dropped.size()) + 2 * h + 2 + extra + (c > 0 ? reserve : 0) > opts.max_nodes) break;

        auto leaves = grow_clique_tree(h, extra, roles, edges, rng);
        if (c > 0) {
            const int leaf = leaves[uniform_int(rng, 0, static_cast<int>(leaves.size()) - 1)];
            const int mode = uniform_int(rng, 1, 3);
            if (mode == 3) {
                const int target = boundary[uniform_int(rng, 0, static_cast<int>(boundary.size()) - 1)];
                for (auto& e : edges) {
                    if (e.first == leaf) e.first = target;
                    if (e.second == leaf) e.second = target;
                }
                leaves.erase(std::find(leaves.begin(), leaves.end(), leaf));
                dropped.insert(leaf);
            } else if (mode == 2) {
                const int target = boundary[uniform_int(rng, 0, static_cast<int>(boundary.size()) - 1)];
                edges.emplace_back(leaf, target);
            } else {
                const int target = measured_nodes[uniform_int(rng, 0, static_cast<int>(measured_nodes.size()) - 1)];
                const int len = uniform_int(rng, 1, 2);
                int prev = leaf;
                for (int i = 0; i < len; ++i) {
                    const int id = live();
                    roles.push_back(Role::Measured);
                    edges.emplace_back(prev, id);
                    measured_nodes.push_back(id);
                    prev = id;
                }
                edges.emplace_back(prev, target);
            }
        }
        boundary.insert(boundary.end(), leaves.begin(), leaves.end());
        measured_nodes.insert(measured_nodes.end(), leaves.begin(), leaves.end());
    }

    const int internal_extra = uniform_int(rng, 0, 3);
    for (int i = 0; i < internal_extra && live() - static_cast<int>(dropped.size()) < opts.max_nodes; ++i) {
        const int target = measured_nodes[uniform_int(rng, 0, static_cast<int>(measured_nodes.size()) - 1)];
        const int id = live();
        roles.push_back(Role::Measured);
        edges.emplace_back(target, id);
        measured_nodes.push_back(id);
    }

    // Compact ids.
    std::vector<std::pair<int, int>> kept_edges = edges;
    std::vector<int> remap(roles.size(), -1);
    std::vector<Role> compact_roles;
    for (int i = 0; i < static_cast<int>(roles.size()); ++i) {
        if (dropped.count(i)) continue;
        remap[i] = static_cast<int>(compact_roles.size());
        compact_roles.push_back(roles[i]);
    }
    for (auto& e : kept_edges) e = {remap[e.first], remap[e.second]};
    return finalize(compact_roles, kept_edges, opts.uniform, rng);
}

std::optional<double> relabeled_edge_error(const RadialNetwork& a, const RadialNetwork& b) {
    if (a.measured() != b.measured() || a.hidden().size() != b.hidden().size() || a.edges.size() != b.edges.size())
        return std::nullopt;
    const auto adj_a = a.adjacency();
    const auto adj_b = b.adjacency();
    std::map<std::pair<int, int>, PhaseBlock> yb;
    for (const auto& e : b.edges) yb[{std::min(e.j, e.k), std::max(e.j, e.k)}] = e.y;

    std::map<int, int> f;
    std::set<int> used;
    for (int m : a.measured()) {
        f[m] = m;
        used.insert(m);
    }
    std::set<int> hidden_b;
    for (int h : b.hidden()) hidden_b.insert(h);

    std::vector<int> pending = a.hidden();
    while (!pending.empty()) {
        bool progress = false;
        for (auto it = pending.begin(); it != pending.end();) {
            std::vector<int> images;
            for (int nb : adj_a.at(*it))
                if (f.count(nb)) images.push_back(f[nb]);
            if (images.size() < 2) {
                ++it;
                continue;
            }
            std::vector<int> cand;
            for (int x : adj_b.at(images[0])) {
                if (!hidden_b.count(x) || used.count(x)) continue;
                const auto& nx = adj_b.at(x);
                if (std::all_of(images.begin(), images.end(),
                                [&](int v) { return std::binary_search(nx.begin(), nx.end(), v); }))
                    cand.push_back(x);
            }
            if (cand.size() != 1) return std::nullopt;
            f[*it] = cand[0];
            used.insert(cand[0]);
            it = pending.erase(it);
            progress = true;
        }
        if (!progress) return std::nullopt;
    }

    double worst = 0.0;
    for (const auto& e : a.edges) {
        const int p = f[e.j], q = f[e.k];
        const auto it = yb.find({std::min(p, q), std::max(p, q)});
        if (it == yb.end()) return std::nullopt;
        const double scale = std::max({1e-300, e.y.norm(), it->second.norm()});
        worst = std::max(worst, (e.y - it->second).norm() / scale);
    }
    return worst;
}

bool compare_up_to_hidden_relabeling(const RadialNetwork& a, const RadialNetwork& b, double tol) {
    const auto err = relabeled_edge_error(a, b);
    return err && *err <= tol;
}

}  // namespace kronrev
