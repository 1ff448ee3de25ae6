#include "kronrev/kron_forward.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

namespace kronrev {

namespace {

bool nonzero(const BlockMatrix& a, int i, int j) { return !a.blk(i, j).isZero(0.0); }

double block_gap(const PhaseBlock& x, const PhaseBlock& y) {
    return (x - y).norm() / std::max({1e-300, x.norm(), y.norm()});
}

KronState make_state(int l, BlockMatrix a_hat, std::vector<int> ids, int clique_start, int n_y,
                     const std::vector<char>& is_hidden) {
    KronState s;
    s.l = l;
    s.A_hat = std::move(a_hat);
    s.clique_start = clique_start;
    const int last = s.A_hat.n() - 1;
    for (int i = clique_start - n_y; i < clique_start; ++i) {
        s.y_stack.push_back(-s.A_hat.block(i, last));
        s.y_hat_stack.push_back(s.A_hat.block(i, i));
        s.y_labels.push_back(ids[i]);
    }
    s.alpha = s.A_hat.block(last, last);
    std::vector<int> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ids[a] < ids[b]; });
    std::vector<int> p(ids.size());
    for (int rank = 0; rank < static_cast<int>(order.size()); ++rank) p[order[rank]] = rank;
    s.perm = BlockPermutation(std::move(p));
    for (int id : ids) s.node_ids.push_back({id, is_hidden[id] ? Role::Hidden : Role::Measured});
    return s;
}

// Measured before hidden, ascending label.
void order_neighbours(std::vector<int>& pos, const std::vector<int>& ids, const std::vector<char>& is_hidden) {
    std::sort(pos.begin(), pos.end(), [&](int a, int b) {
        return std::make_pair(is_hidden[ids[a]], ids[a]) < std::make_pair(is_hidden[ids[b]], ids[b]);
    });
}

}  // namespace

BlockMatrix KronState::clique() const {
    std::vector<int> pos(A_hat.n() - clique_start);
    std::iota(pos.begin(), pos.end(), clique_start);
    return A_hat.sub(pos);
}

BlockMatrix one_step_reduce(const BlockMatrix& a, int node) {
    const int n = a.n();
    if (node < 0 || node >= n) throw Error(ErrorKind::SizeMismatch, "node index out of range");
    const PhaseBlock inv = invert_block(a.block(node, node));
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (i != node) keep.push_back(i);
    BlockMatrix out = a.sub(keep);
    std::vector<int> nb;
    std::vector<PhaseBlock> left;
    for (int i = 0; i < n - 1; ++i) {
        if (!nonzero(a, keep[i], node)) continue;
        nb.push_back(i);
        left.push_back(a.block(keep[i], node) * inv);
    }
    for (size_t a_ = 0; a_ < nb.size(); ++a_)
        for (int j : nb) out.blk(nb[a_], j) -= left[a_] * a.block(node, keep[j]);
    return out;
}

std::vector<int> default_elimination_order(const BlockMatrix& a0, const std::vector<int>& hidden) {
    if (hidden.empty()) return {};
    std::set<int> hs(hidden.begin(), hidden.end());
    auto hidden_nbrs = [&](int h) {
        std::vector<int> out;
        for (int q : hs)
            if (q != h && nonzero(a0, q, h)) out.push_back(q);
        return out;
    };
    int start = -1;
    for (int h : hs)
        if (hidden_nbrs(h).size() <= 1) {
            start = h;
            break;
        }
    if (start < 0) throw Error(ErrorKind::StructureViolation, "hidden subgraph has no leaf (not a tree)");
    std::vector<int> order;
    std::set<int> seen{start};
    std::deque<int> queue{start};
    while (!queue.empty()) {
        const int h = queue.front();
        queue.pop_front();
        order.push_back(h);
        for (int q : hidden_nbrs(h))
            if (seen.insert(q).second) queue.push_back(q);
    }
    if (order.size() != hs.size())
        throw Error(ErrorKind::StructureViolation, "hidden nodes do not form one connected subtree");
    return order;
}

ForwardResult iterative_reduce(const BlockMatrix& a0, const std::vector<int>& hidden, bool verify) {
    const int n = a0.n();
    std::vector<char> is_hidden(n, 0);
    for (int h : hidden) {
        if (h < 0 || h >= n) throw Error(ErrorKind::SizeMismatch, "hidden index out of range");
        if (is_hidden[h]) throw Error(ErrorKind::InvalidSubset, "hidden index listed twice");
        is_hidden[h] = 1;
    }
    ForwardResult res;
    if (hidden.empty()) {
        res.reduced = a0;
        res.kept.resize(n);
        std::iota(res.kept.begin(), res.kept.end(), 0);
        return res;
    }
    if (static_cast<int>(hidden.size()) >= n)
        throw Error(ErrorKind::InvalidSubset, "cannot eliminate every node");

    // Initial relabeling around the first eliminated node.
    const int h0 = hidden[0];
    std::vector<int> ys, rest;
    for (int q = 0; q < n; ++q) {
        if (q == h0) continue;
        (nonzero(a0, q, h0) ? ys : rest).push_back(q);
    }
    std::vector<int> all_ids(n);
    std::iota(all_ids.begin(), all_ids.end(), 0);
    order_neighbours(ys, all_ids, is_hidden);
    std::vector<int> ids = rest;
    ids.insert(ids.end(), ys.begin(), ys.end());
    ids.push_back(h0);
    BlockMatrix a_hat = a0.sub(ids);
    int clique_start = n - 1;
    int n_y = static_cast<int>(ys.size());

    const int k = static_cast<int>(hidden.size());
    for (int l = 0; l < k; ++l) {
        KronState s = make_state(l, a_hat, ids, clique_start, n_y, is_hidden);
        if (verify) {
            const auto v = check_invariant_structure(s, a0);
            if (!v.empty())
                throw Error(ErrorKind::StructureViolation,
                            "step " + std::to_string(l) + " check (" + v.front().check + "): " + v.front().message);
        }
        res.trace.push_back(std::move(s));

        BlockMatrix b = one_step_reduce(a_hat, a_hat.n() - 1);
        ids.pop_back();
        const int y_start = clique_start - n_y;
        if (l == k - 1) {
            a_hat = std::move(b);
            break;
        }

        const int next = hidden[l + 1];
        const int p = static_cast<int>(std::find(ids.begin(), ids.end(), next) - ids.begin());
        if (p < y_start)
            throw Error(ErrorKind::StructureViolation,
                        "elimination order is not connected: node " + std::to_string(next) +
                            " is not in the current clique at step " + std::to_string(l + 1));
        std::vector<int> new_y, new_rest;
        for (int q = 0; q < y_start; ++q) (nonzero(b, q, p) ? new_y : new_rest).push_back(q);
        order_neighbours(new_y, ids, is_hidden);
        std::vector<int> pos = new_rest;
        pos.insert(pos.end(), new_y.begin(), new_y.end());
        for (int q = y_start; q < b.n(); ++q)
            if (q != p) pos.push_back(q);
        pos.push_back(p);

        a_hat = b.sub(pos);
        std::vector<int> new_ids;
        for (int q : pos) new_ids.push_back(ids[q]);
        ids = std::move(new_ids);
        clique_start = static_cast<int>(new_rest.size() + new_y.size());
        n_y = static_cast<int>(new_y.size());
    }

    std::vector<int> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ids[a] < ids[b]; });
    res.reduced = a_hat.sub(order);
    for (int o : order) res.kept.push_back(ids[o]);
    return res;
}

ForwardResult iterative_reduce_components(const BlockMatrix& a0, const std::vector<int>& hidden) {
    std::set<int> remaining(hidden.begin(), hidden.end());
    BlockMatrix cur = a0;
    std::vector<int> cur_ids(a0.n());
    std::iota(cur_ids.begin(), cur_ids.end(), 0);
    ForwardResult out;
    while (!remaining.empty()) {
        // Component of the lowest remaining hidden node, in current indices.
        auto to_cur = [&](int orig) {
            return static_cast<int>(std::find(cur_ids.begin(), cur_ids.end(), orig) - cur_ids.begin());
        };
        std::set<int> comp{*remaining.begin()};
        std::deque<int> queue{*remaining.begin()};
        while (!queue.empty()) {
            const int h = queue.front();
            queue.pop_front();
            for (int q : remaining)
                if (!comp.count(q) && nonzero(cur, to_cur(q), to_cur(h))) {
                    comp.insert(q);
                    queue.push_back(q);
                }
        }
        std::vector<int> local;
        for (int h : comp) local.push_back(to_cur(h));
        // Measured nodes here may have further measured neighbours, so the
        // y_hat == y check (d) only holds for leaves and is skipped.
        auto part = iterative_reduce(cur, default_elimination_order(cur, local), false);
        for (const auto& s : part.trace)
            for (const auto& v : check_invariant_structure(s, cur))
                if (v.check != 'd')
                    throw Error(ErrorKind::StructureViolation,
                                "step " + std::to_string(s.l) + " check (" + v.check + "): " + v.message);
        for (auto& s : part.trace) out.trace.push_back(std::move(s));
        std::vector<int> next_ids;
        for (int q : part.kept) next_ids.push_back(cur_ids[q]);
        cur = std::move(part.reduced);
        cur_ids = std::move(next_ids);
        for (int h : comp) remaining.erase(h);
    }
    out.reduced = std::move(cur);
    out.kept = std::move(cur_ids);
    return out;
}

std::vector<InvariantViolation> check_invariant_layout(const KronState& s, double tol) {
    std::vector<InvariantViolation> out;
    const BlockMatrix& a = s.A_hat;
    const int n = a.n();
    const int last = n - 1;
    const int ys = s.y_start();
    if (n == 0 || s.clique_start < 0 || s.clique_start > last || ys < 0 ||
        static_cast<int>(s.node_ids.size()) != n || s.perm.size() != n ||
        s.y_hat_stack.size() != s.y_stack.size() || s.y_labels.size() != s.y_stack.size()) {
        out.push_back({'f', "state bookkeeping is inconsistent with A_hat"});
        return out;
    }
    for (int r = 0; r < ys; ++r)
        if (nonzero(a, r, last) || nonzero(a, last, r))
            out.push_back({'a', "upper-right block at row " + std::to_string(r) + " is not zero"});
    for (int i = ys; i < s.clique_start; ++i)
        for (int j = ys; j < last; ++j)
            if (j != i && (nonzero(a, i, j) || nonzero(a, j, i)))
                out.push_back({'b', "y-neighbour band couples positions " + std::to_string(i) + "," + std::to_string(j)});
    for (int i = 0; i < s.n_l(); ++i) {
        const NodeId& id = s.node_ids[ys + i];
        if (id.role == Role::Measured && block_gap(s.y_hat_stack[i], s.y_stack[i]) > tol)
            out.push_back({'d', "y_hat != y on measured row " + std::to_string(id.label)});
    }
    if (s.n_l() < 2) out.push_back({'e', "alpha has " + std::to_string(s.n_l()) + " non-clique neighbours (< 2)"});

    const double scale = std::max(1.0, a.norm());
    for (int i = 0; i < s.n_l(); ++i) {
        const int p = ys + i;
        if (s.y_labels[i] != s.node_ids[p].label) out.push_back({'f', "y label mismatch"});
        if (block_gap(s.y_stack[i], -a.block(p, last)) > tol) out.push_back({'f', "y_stack does not match A_hat"});
        if (block_gap(s.y_hat_stack[i], a.block(p, p)) > tol) out.push_back({'f', "y_hat_stack does not match A_hat"});
        PhaseBlock d = PhaseBlock::Zero();
        for (int r = 0; r < ys; ++r) d += a.blk(p, r);
        if ((s.y_hat_stack[i] - (s.y_stack[i] - d)).norm() > tol * scale)
            out.push_back({'f', "y_hat != y - d at position " + std::to_string(p)});
    }
    if (block_gap(s.alpha, a.block(last, last)) > tol) out.push_back({'f', "alpha does not match A_hat"});
    return out;
}

std::vector<InvariantViolation> check_invariant_structure(const KronState& s, const BlockMatrix& a0, double tol) {
    auto out = check_invariant_layout(s, tol);
    if (!out.empty() && out.front().check == 'f' && static_cast<int>(s.node_ids.size()) != s.A_hat.n()) return out;
    const BlockMatrix& a = s.A_hat;
    for (int i = 0; i < a.n(); ++i) {
        const int li = s.node_ids[i].label;
        if (li < 0 || li >= a0.n()) {
            out.push_back({'c', "node label " + std::to_string(li) + " is outside A0"});
            return out;
        }
    }
    for (int i = 0; i < a.n(); ++i)
        for (int j = 0; j < a.n(); ++j) {
            if (i >= s.clique_start && j >= s.clique_start) continue;
            const PhaseBlock ref = a0.block(s.node_ids[i].label, s.node_ids[j].label);
            const PhaseBlock got = a.block(i, j);
            if ((ref - got).norm() > tol * std::max(ref.norm(), got.norm()))
                out.push_back({'c', "block (" + std::to_string(i) + "," + std::to_string(j) +
                                        ") outside the clique differs from A0"});
        }
    return out;
}

}  // namespace kronrev
