#pragma once

// Independent reference computations used to pin expected values in tests.
// Nothing here calls into the algorithms under test beyond plain accessors.

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "kronrev/kronrev.hpp"

namespace oracle {

using kronrev::BlockMatrix;
using kronrev::DenseMatrix;
using kronrev::PhaseBlock;

// Schur complement through an explicit full-pivot inverse of the eliminated block.
inline BlockMatrix dense_schur(const BlockMatrix& a, const std::vector<int>& keep) {
    std::vector<int> drop;
    for (int i = 0; i < a.n(); ++i)
        if (std::find(keep.begin(), keep.end(), i) == keep.end()) drop.push_back(i);
    const DenseMatrix d = a.dense();
    auto pick = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
        DenseMatrix out(3 * rows.size(), 3 * cols.size());
        for (size_t r = 0; r < rows.size(); ++r)
            for (size_t c = 0; c < cols.size(); ++c)
                out.block<3, 3>(3 * r, 3 * c) = d.block<3, 3>(3 * rows[r], 3 * cols[c]);
        return out;
    };
    if (drop.empty()) return BlockMatrix(pick(keep, keep));
    const DenseMatrix inv22 = pick(drop, drop).fullPivLu().inverse();
    return BlockMatrix(DenseMatrix(pick(keep, keep) - pick(keep, drop) * inv22 * pick(drop, keep)));
}

// Forward substitution for a hidden node with block alpha joined to two
// neighbours by y1, y2 (and possibly to others): the resulting 2x2 clique blocks.
struct PairBlocks {
    PhaseBlock a1, a2, a3;
};
inline PairBlocks forward_pair(const PhaseBlock& y1, const PhaseBlock& y2, const PhaseBlock& alpha) {
    const PhaseBlock ai = alpha.inverse();
    return {y1 - y1 * ai * y1, y2 - y2 * ai * y2, -y1 * ai * y2};
}

// Bron-Kerbosch with pivoting on an adjacency list; returns every maximal clique.
inline void bron_kerbosch(const std::vector<std::set<int>>& adj, std::set<int> r, std::set<int> p, std::set<int> x,
                          std::vector<std::set<int>>& out) {
    if (p.empty() && x.empty()) {
        out.push_back(r);
        return;
    }
    std::set<int> px = p;
    px.insert(x.begin(), x.end());
    const int u = *std::max_element(px.begin(), px.end(), [&](int a, int b) {
        return adj[a].size() < adj[b].size();
    });
    std::vector<int> cand;
    for (int v : p)
        if (!adj[u].count(v)) cand.push_back(v);
    for (int v : cand) {
        std::set<int> r2 = r, p2, x2;
        r2.insert(v);
        for (int w : p)
            if (adj[v].count(w)) p2.insert(w);
        for (int w : x)
            if (adj[v].count(w)) x2.insert(w);
        bron_kerbosch(adj, r2, p2, x2, out);
        p.erase(v);
        x.insert(v);
    }
}

// Maximal cliques of G(A) with at least `min_size` nodes, as 1-based labels.
inline std::set<std::set<int>> maximal_cliques(const BlockMatrix& a, double zero_tol, size_t min_size = 3) {
    std::vector<std::set<int>> adj(a.n());
    const double floor = zero_tol * a.norm();
    for (int i = 0; i < a.n(); ++i)
        for (int j = 0; j < a.n(); ++j)
            if (i != j && a.block(i, j).norm() > floor) adj[i].insert(j);
    std::set<int> all;
    for (int i = 0; i < a.n(); ++i) all.insert(i);
    std::vector<std::set<int>> found;
    bron_kerbosch(adj, {}, all, {}, found);
    std::set<std::set<int>> out;
    for (const auto& c : found) {
        if (c.size() < min_size) continue;
        std::set<int> labels;
        for (int i : c) labels.insert(i + 1);
        out.insert(labels);
    }
    return out;
}

// Measured nodes sharing a hidden neighbour, read straight off the edge list.
inline std::set<std::set<int>> sibling_ground_truth(const kronrev::RadialNetwork& net) {
    std::map<int, std::set<int>> measured_nbrs;
    std::set<int> hidden;
    for (const auto& n : net.nodes)
        if (n.role == kronrev::Role::Hidden) hidden.insert(n.id);
    for (const auto& e : net.edges) {
        if (hidden.count(e.j) && !hidden.count(e.k)) measured_nbrs[e.j].insert(e.k);
        if (hidden.count(e.k) && !hidden.count(e.j)) measured_nbrs[e.k].insert(e.j);
    }
    std::set<std::set<int>> out;
    for (const auto& [h, s] : measured_nbrs)
        if (s.size() >= 2) out.insert(s);
    return out;
}

// Boundary measured nodes: those adjacent to a hidden node.
inline std::set<int> boundary_ground_truth(const kronrev::RadialNetwork& net) {
    std::set<int> hidden, out;
    for (const auto& n : net.nodes)
        if (n.role == kronrev::Role::Hidden) hidden.insert(n.id);
    for (const auto& e : net.edges) {
        if (hidden.count(e.j) && !hidden.count(e.k)) out.insert(e.k);
        if (hidden.count(e.k) && !hidden.count(e.j)) out.insert(e.j);
    }
    return out;
}

// Complex symmetric block with positive definite real part, drawn without the library.
inline PhaseBlock random_line(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Matrix3d re, im;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            re(i, j) = u(rng);
            im(i, j) = u(rng);
        }
    re = re * re.transpose() + 0.5 * Eigen::Matrix3d::Identity();
    im = (0.5 * (im + im.transpose())).eval();
    PhaseBlock b;
    b.real() = re;
    b.imag() = im;
    return b;
}

// Star with measured leaves 1..n on one hidden centre n+1.
inline kronrev::RadialNetwork star(const std::vector<PhaseBlock>& ys) {
    kronrev::RadialNetwork net;
    const int n = static_cast<int>(ys.size());
    for (int i = 1; i <= n; ++i) net.nodes.push_back({i, kronrev::Role::Measured});
    net.nodes.push_back({n + 1, kronrev::Role::Hidden});
    for (int i = 1; i <= n; ++i) net.edges.push_back({i, n + 1, ys[i - 1], std::nullopt});
    return net;
}

// Star admittance assembled by hand: centre last.
inline BlockMatrix star_matrix(const std::vector<PhaseBlock>& ys) {
    const int n = static_cast<int>(ys.size());
    BlockMatrix a(n + 1);
    PhaseBlock centre = PhaseBlock::Zero();
    for (int i = 0; i < n; ++i) {
        a.set(i, i, ys[i]);
        a.set(i, n, -ys[i]);
        a.set(n, i, -ys[i]);
        centre += ys[i];
    }
    a.set(n, n, centre);
    return a;
}

inline double rel(const DenseMatrix& a, const DenseMatrix& b) {
    const double s = std::max(a.norm(), b.norm());
    return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

}  // namespace oracle
