#include "kronrev/kron_reverse.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

namespace kronrev {

namespace {

constexpr double kDegenerate = 1e-9;

using Mat9 = Eigen::Matrix<cplx, 9, 9>;
using Vec9 = Eigen::Matrix<cplx, 9, 1>;

Vec9 vec_rows(const PhaseBlock& b) {
    Vec9 v;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v(3 * i + j) = b(i, j);
    return v;
}

PhaseBlock unvec_rows(const Vec9& v) {
    PhaseBlock b;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b(i, j) = v(3 * i + j);
    return b;
}

PhaseBlock checked_symmetric(const PhaseBlock& b, double tau_sym, const std::string& what) {
    if (!b.allFinite()) throw Error(ErrorKind::AssumptionBreach, what + " is not finite");
    if (!is_symmetric_block(b, tau_sym)) throw Error(ErrorKind::AssumptionBreach, what + " is not symmetric");
    return symmetrized(b);
}

PhaseBlock checked_line(const PhaseBlock& b, double tau_sym, const std::string& what) {
    PhaseBlock s = checked_symmetric(b, tau_sym, what);
    if (!has_pd_real_part(s)) throw Error(ErrorKind::AssumptionBreach, what + " has a real part that is not positive definite");
    return s;
}

BlockPermutation rank_by_label(const std::vector<NodeId>& ids) {
    std::vector<int> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return ids[a].label < ids[b].label; });
    std::vector<int> p(ids.size());
    for (int r = 0; r < static_cast<int>(order.size()); ++r) p[order[r]] = r;
    return BlockPermutation(std::move(p));
}

}  // namespace

std::pair<PhaseBlock, PhaseBlock> solve_pair(const PhaseBlock& a1, const PhaseBlock& a2, const PhaseBlock& a3) {
    const PhaseBlock a1i = invert_block(a1);
    const PhaseBlock a2i = invert_block(a2);
    invert_block(a3);
    const PhaseBlock L = a1i * a3;
    const PhaseBlock R = a3 * a2i;
    Mat9 k = Mat9::Identity();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) k(3 * i + j, 3 * p + q) -= L(i, p) * R(q, j);
    Eigen::JacobiSVD<Mat9> svd(k);
    const auto& sv = svd.singularValues();
    if (sv(8) < kDegenerate * std::max(1.0, sv(0)))
        throw Error(ErrorKind::DegenerateSystem,
                    "pair system is singular (eliminated node would have degree 2)");
    const Vec9 rhs = vec_rows(a1i * (PhaseBlock::Identity() + R));
    const PhaseBlock u = unvec_rows(k.fullPivLu().solve(rhs));
    const PhaseBlock v = (PhaseBlock::Identity() + u * a3) * a2i;
    return {invert_block(u), invert_block(v)};
}

std::pair<PhaseBlock, PhaseBlock> solve_pair_closed_form(const PhaseBlock& a1, const PhaseBlock& a2,
                                                         const PhaseBlock& a3) {
    const PhaseBlock a1i = invert_block(a1), a2i = invert_block(a2), a3i = invert_block(a3);
    // a sum that cancels to roundoff is as singular as a zero block
    auto inv_or_degenerate = [](const PhaseBlock& u, const PhaseBlock& v) {
        const PhaseBlock b = u + v;
        if (b.norm() < kDegenerate * std::max(u.norm(), v.norm()))
            throw Error(ErrorKind::DegenerateSystem, "closed-form denominator is singular");
        try {
            return invert_block(b);
        } catch (const Error&) {
            throw Error(ErrorKind::DegenerateSystem, "closed-form denominator is singular");
        }
    };
    const PhaseBlock y1 = (a1 * a3i - a3 * a2i) * inv_or_degenerate(a2i, a3i);
    const PhaseBlock y2 = (a2 * a3i - a3 * a1i) * inv_or_degenerate(a1i, a3i);
    return {y1, y2};
}

PhaseBlock recover_alpha(const PhaseBlock& y1, const PhaseBlock& y2, const PhaseBlock& a3) {
    return -y2 * invert_block(a3) * y1;
}

NeighborColumn recover_neighbor_column(const BlockMatrix& m11, const std::vector<PhaseBlock>& d,
                                       const PhaseBlock& alpha, double tau_sym) {
    const int nl = m11.n();
    if (nl < 2 || static_cast<int>(d.size()) != nl)
        throw Error(ErrorKind::InvalidSubset, "need at least two siblings and one d block per sibling");
    if (!is_block_symmetric(m11, tau_sym))
        throw Error(ErrorKind::AssumptionBreach, "sibling block M11 is not block symmetric");
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j)
            if (!is_symmetric_block(m11.block(i, j), tau_sym))
                throw Error(ErrorKind::AssumptionBreach, "sibling block M11 has a non-symmetric entry");

    const PhaseBlock a1 = m11.block(0, 0) + d[0];
    const PhaseBlock a2 = m11.block(1, 1) + d[1];
    const PhaseBlock a3 = m11.block(0, 1);
    auto [y1, y2] = solve_pair(a1, a2, a3);
    NeighborColumn col;
    col.y.push_back(checked_line(y1, tau_sym, "recovered y[1]"));
    col.y.push_back(checked_line(y2, tau_sym, "recovered y[2]"));
    const PhaseBlock y1i_alpha = invert_block(col.y[0]) * alpha;
    for (int j = 2; j < nl; ++j)
        col.y.push_back(checked_line(-m11.block(j, 0) * y1i_alpha, tau_sym, "recovered y[" + std::to_string(j + 1) + "]"));
    for (int j = 0; j < nl; ++j) col.y_hat.push_back(col.y[j] - d[j]);
    return col;
}

CliqueRemainder recover_clique_remainder(const BlockMatrix& c_next, const PhaseBlock& y1, const PhaseBlock& alpha,
                                         int n_l) {
    const int n = c_next.n();
    if (n_l < 1 || n_l > n) throw Error(ErrorKind::SizeMismatch, "sibling count outside the clique");
    CliqueRemainder out;
    const int r = n - n_l;
    out.c11 = BlockMatrix(r);
    if (r == 0) return out;
    const PhaseBlock y1i_alpha = invert_block(y1) * alpha;
    const PhaseBlock alpha_i = invert_block(alpha);
    for (int m = 0; m < r; ++m) out.c12.push_back(c_next.block(0, n_l + m).transpose() * y1i_alpha);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
            out.c11.blk(a, b) = c_next.block(n_l + a, n_l + b) + out.c12[a] * alpha_i * out.c12[b].transpose();
    return out;
}

KronState reverse_step(const BlockMatrix& A_hat_next, int clique_start, const SiblingGroup& siblings,
                       const ReverseContext& ctx) {
    const int n = A_hat_next.n();
    const int cs = clique_start;
    if (cs < 0 || cs >= n) throw Error(ErrorKind::SizeMismatch, "clique_start outside the matrix");
    if (static_cast<int>(ctx.node_ids.size()) != n) throw Error(ErrorKind::SizeMismatch, "node_ids size mismatch");
    std::vector<int> members = siblings.members;
    std::sort(members.begin(), members.end());
    if (members.size() < 2) throw Error(ErrorKind::InvalidSubset, "a reverse step needs at least two siblings");
    if (std::adjacent_find(members.begin(), members.end()) != members.end() || members.front() < 0 ||
        members.back() >= n - cs)
        throw Error(ErrorKind::InvalidSubset, "sibling indices must be distinct clique positions");

    const int nl = static_cast<int>(members.size());
    std::vector<int> sib, others;
    for (int m : members) sib.push_back(cs + m);
    for (int q = cs; q < n; ++q)
        if (!std::binary_search(members.begin(), members.end(), q - cs)) others.push_back(q);

    std::vector<PhaseBlock> d;
    for (int s : sib) {
        PhaseBlock acc = PhaseBlock::Zero();
        for (int r = 0; r < cs; ++r) acc += A_hat_next.blk(s, r);
        d.push_back(acc);
    }

    std::vector<int> clique_order = sib;
    clique_order.insert(clique_order.end(), others.begin(), others.end());
    const BlockMatrix c_perm = A_hat_next.sub(clique_order);
    std::vector<int> first(nl);
    std::iota(first.begin(), first.end(), 0);
    const BlockMatrix m11 = c_perm.sub(first);

    const PhaseBlock a1 = m11.block(0, 0) + d[0];
    const PhaseBlock a2 = m11.block(1, 1) + d[1];
    const PhaseBlock a3 = m11.block(0, 1);
    const auto [y1, y2] = solve_pair(a1, a2, a3);
    const PhaseBlock alpha = checked_line(recover_alpha(y1, y2, a3), ctx.tau_sym, "recovered alpha");
    const NeighborColumn col = recover_neighbor_column(m11, d, alpha, ctx.tau_sym);
    const CliqueRemainder rem = recover_clique_remainder(c_perm, col.y[0], alpha, nl);

    const int nr = static_cast<int>(others.size());
    const int N = n + 1;
    BlockMatrix out(N);
    // Positions in the output.
    auto p_sib = [&](int i) { return cs + i; };
    auto p_oth = [&](int i) { return cs + nl + i; };
    const int p_new = N - 1;

    for (int r = 0; r < cs; ++r) {
        for (int q = 0; q < cs; ++q) out.blk(r, q) = A_hat_next.blk(r, q);
        for (int i = 0; i < nl; ++i) {
            out.blk(r, p_sib(i)) = A_hat_next.blk(r, sib[i]);
            out.blk(p_sib(i), r) = A_hat_next.blk(sib[i], r);
        }
        for (int i = 0; i < nr; ++i) {
            out.blk(r, p_oth(i)) = A_hat_next.blk(r, others[i]);
            out.blk(p_oth(i), r) = A_hat_next.blk(others[i], r);
        }
    }
    for (int i = 0; i < nl; ++i) {
        out.blk(p_sib(i), p_sib(i)) = col.y_hat[i];
        out.blk(p_sib(i), p_new) = -col.y[i];
        out.blk(p_new, p_sib(i)) = -col.y[i].transpose();
    }
    for (int a = 0; a < nr; ++a) {
        for (int b = 0; b < nr; ++b) out.blk(p_oth(a), p_oth(b)) = rem.c11.block(a, b);
        const PhaseBlock c = checked_symmetric(rem.c12[a], ctx.tau_sym, "recovered c12 block");
        out.blk(p_oth(a), p_new) = c;
        out.blk(p_new, p_oth(a)) = c.transpose();
    }
    out.blk(p_new, p_new) = alpha;

    KronState s;
    s.l = ctx.l;
    s.A_hat = std::move(out);
    s.clique_start = cs + nl;
    s.y_stack = col.y;
    s.y_hat_stack = col.y_hat;
    s.alpha = alpha;
    for (int r = 0; r < cs; ++r) s.node_ids.push_back(ctx.node_ids[r]);
    for (int q : sib) {
        s.node_ids.push_back(ctx.node_ids[q]);
        s.y_labels.push_back(ctx.node_ids[q].label);
    }
    for (int q : others) s.node_ids.push_back(ctx.node_ids[q]);
    s.node_ids.push_back({ctx.new_label, Role::Hidden});
    s.perm = rank_by_label(s.node_ids);
    return s;
}

RadialNetwork identify_clique(const BlockMatrix& ybar_clique, const IdentifyOptions& opt) {
    const int n = ybar_clique.n();
    std::vector<int> labels = opt.labels;
    if (labels.empty()) {
        labels.resize(n);
        std::iota(labels.begin(), labels.end(), 1);
    }
    if (static_cast<int>(labels.size()) != n) throw Error(ErrorKind::SizeMismatch, "one label per clique block required");
    int next_label = opt.first_hidden_label > 0 ? opt.first_hidden_label
                                                : *std::max_element(labels.begin(), labels.end()) + 1;
    const SiblingFinder finder = opt.finder ? opt.finder : SiblingFinder(find_sibling_groups);

    RadialNetwork net;
    for (int lab : labels) net.nodes.push_back({lab, Role::Measured});
    if (n <= 1) return net;

    BlockMatrix a_hat = normalize_diagonal(ybar_clique);
    const double zero_floor = opt.tol.tau_zero * a_hat.norm();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && a_hat.blk(i, j).norm() <= zero_floor)
                throw Error(ErrorKind::AssumptionBreach, "input is not a clique: block (" + std::to_string(labels[i]) +
                                                             "," + std::to_string(labels[j]) + ") is zero");
    int cs = 0;
    std::vector<NodeId> ids;
    for (int lab : labels) ids.push_back({lab, Role::Measured});
    std::vector<KronState> states;

    for (int iter = 0; a_hat.n() - cs > 1; ++iter) {
        const int csize = a_hat.n() - cs;
        std::vector<int> clique_pos(csize);
        std::iota(clique_pos.begin(), clique_pos.end(), cs);
        const BlockMatrix clique = a_hat.sub(clique_pos);
        const std::string where = "reverse iteration " + std::to_string(iter);

        std::vector<SiblingGroup> groups;
        if (csize == 2) {
            groups.push_back({{0, 1}, {}});
        } else {
            try {
                groups = finder(clique, opt.tol.tol_gamma);
            } catch (const Error& e) {
                throw Error(e.kind(), where + ": " + e.what());
            }
        }

        std::optional<KronState> accepted;
        std::optional<Error> first_error;
        const double floor = opt.tol.tau_zero * clique.norm();
        for (const auto& g : groups) {
            try {
                KronState st = reverse_step(a_hat, cs, g, {ids, next_label, 0, opt.tol.tau_sym});
                bool complete = true;
                for (int i = st.clique_start; i < st.A_hat.n() && complete; ++i)
                    for (int j = st.clique_start; j < st.A_hat.n(); ++j)
                        if (i != j && st.A_hat.blk(i, j).norm() <= floor) {
                            complete = false;
                            break;
                        }
                if (!complete) continue;
                accepted = std::move(st);
                break;
            } catch (const Error& e) {
                if (!first_error) first_error = Error(e.kind(), where + ": " + e.what());
            }
        }
        if (!accepted) {
            if (first_error) throw *first_error;
            throw Error(ErrorKind::NoGroupFound, where + ": no sibling group yields a consistent predecessor clique");
        }
        for (int i = 0; i < accepted->n_l(); ++i) {
            const int a = std::min(next_label, accepted->y_labels[i]);
            const int b = std::max(next_label, accepted->y_labels[i]);
            net.edges.push_back({a, b, accepted->y_stack[i], std::nullopt});
        }
        net.nodes.push_back({next_label, Role::Hidden});
        ++next_label;
        a_hat = accepted->A_hat;
        cs = accepted->clique_start;
        ids = accepted->node_ids;
        states.push_back(std::move(*accepted));
    }

    const int k = static_cast<int>(states.size());
    for (int i = 0; i < k; ++i) states[i].l = k - 1 - i;
    std::reverse(states.begin(), states.end());
    if (opt.trace) *opt.trace = std::move(states);

    std::sort(net.nodes.begin(), net.nodes.end(), [](const Node& a, const Node& b) {
        return std::make_pair(a.role == Role::Hidden, a.id) < std::make_pair(b.role == Role::Hidden, b.id);
    });
    std::sort(net.edges.begin(), net.edges.end(),
              [](const Edge& x, const Edge& y) { return std::tie(x.j, x.k) < std::tie(y.j, y.k); });
    const auto adj = net.adjacency();
    for (const auto& node : net.nodes)
        if (node.role == Role::Hidden && adj.at(node.id).size() < 3)
            throw Error(ErrorKind::AssumptionBreach,
                        "recovered hidden node " + std::to_string(node.id) + " has degree < 3");
    return net;
}

}  // namespace kronrev
