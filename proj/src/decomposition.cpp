#include "kronrev/decomposition.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace kronrev {

namespace {

struct CliqueCover {
    std::vector<std::vector<int>> cliques;  // block indices, ascending; sorted by first member
    std::vector<std::pair<int, int>> tree_edges;
};

CliqueCover cover_cliques(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    auto adjacent = [&](int a, int b) { return std::binary_search(adj[a].begin(), adj[a].end(), b); };
    auto closure = [&](int a, int b) {
        std::vector<int> k;
        std::set_intersection(adj[a].begin(), adj[a].end(), adj[b].begin(), adj[b].end(), std::back_inserter(k));
        k.push_back(a);
        k.push_back(b);
        std::sort(k.begin(), k.end());
        return k;
    };
    CliqueCover out;
    std::set<std::vector<int>> found;
    for (int a = 0; a < n; ++a)
        for (int b : adj[a]) {
            if (b <= a) continue;
            auto k = closure(a, b);
            if (k.size() < 3) {
                out.tree_edges.emplace_back(a, b);
                continue;
            }
            if (found.count(k)) continue;
            for (size_t p = 0; p < k.size(); ++p)
                for (size_t q = p + 1; q < k.size(); ++q) {
                    if (!adjacent(k[p], k[q]))
                        throw Error(ErrorKind::MalformedReduction,
                                    "common neighbours of an edge are not a clique (two cliques share an edge)");
                    if (closure(k[p], k[q]) != k)
                        throw Error(ErrorKind::MalformedReduction, "maximal cliques share an edge");
                }
            found.insert(k);
        }
    out.cliques.assign(found.begin(), found.end());
    std::sort(out.cliques.begin(), out.cliques.end());
    return out;
}

std::vector<int> to_labels(const std::vector<int>& idx, const std::vector<int>& labels) {
    std::vector<int> out;
    for (int i : idx) out.push_back(labels[i]);
    return out;
}

LabeledMatrix labeled_from_network(const RadialNetwork& net) {
    LabeledMatrix m;
    for (const auto& node : net.nodes) {
        m.labels.push_back(node.id);
        m.roles.push_back(node.role);
    }
    m.Y = assemble_admittance(net);
    return m;
}

// Union of labels, measured ascending then hidden ascending.
struct LabelSpace {
    std::map<int, Role> roles;
    std::vector<int> order;
    std::map<int, int> pos;

    void add(int label, Role role) {
        auto [it, fresh] = roles.emplace(label, role);
        if (!fresh && it->second != role)
            throw Error(ErrorKind::InconsistentAttachment, "label " + std::to_string(label) + " has two roles");
    }
    void finish() {
        for (auto [l, r] : roles)
            if (r == Role::Measured) order.push_back(l);
        for (auto [l, r] : roles)
            if (r == Role::Hidden) order.push_back(l);
        for (int i = 0; i < static_cast<int>(order.size()); ++i) pos[order[i]] = i;
    }
    LabeledMatrix empty_matrix() const {
        LabeledMatrix m;
        m.labels = order;
        for (int l : order) m.roles.push_back(roles.at(l));
        m.Y = BlockMatrix(static_cast<int>(order.size()));
        return m;
    }
};

}  // namespace

std::string describe(const Attachment& a) {
    if (std::holds_alternative<Disconnected>(a)) return "disconnected";
    if (const auto* l = std::get_if<AdjacentLine>(&a))
        return "line " + std::to_string(l->i) + "-" + std::to_string(l->j);
    return "shared node " + std::to_string(std::get<SharedNode>(a).label);
}

std::vector<std::vector<int>> block_graph(const BlockMatrix& a, double zero_tol) {
    const int n = a.n();
    const double floor = zero_tol * a.norm();
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && a.blk(i, j).norm() > floor) adj[i].push_back(j);
    return adj;
}

Classification classify_from_reduction(const BlockMatrix& ybar, double zero_tol) {
    if (!is_complex_symmetric(ybar, 1e-8))
        throw Error(ErrorKind::MalformedReduction, "reduced matrix is not symmetric");
    const auto cover = cover_cliques(block_graph(ybar, zero_tol));
    std::vector<int> labels(ybar.n());
    std::iota(labels.begin(), labels.end(), 1);
    Classification c;
    std::set<int> boundary;
    for (const auto& k : cover.cliques) {
        c.cliques.push_back(to_labels(k, labels));
        boundary.insert(c.cliques.back().begin(), c.cliques.back().end());
    }
    for (auto [a, b] : cover.tree_edges) c.tree_edges.emplace_back(labels[a], labels[b]);
    for (int l : labels) (boundary.count(l) ? c.partition.measured_boundary : c.partition.measured_internal).insert(l);
    return c;
}

Stripped strip_internal(const BlockMatrix& ybar, const NodePartition& part) {
    Stripped s;
    s.internal.assign(part.measured_internal.begin(), part.measured_internal.end());
    s.boundary.assign(part.measured_boundary.begin(), part.measured_boundary.end());
    std::vector<int> ii, bi;
    for (int l : s.internal) ii.push_back(l - 1);
    for (int l : s.boundary) bi.push_back(l - 1);
    for (int i : ii)
        if (i < 0 || i >= ybar.n()) throw Error(ErrorKind::SizeMismatch, "partition label outside the matrix");
    for (int i : bi)
        if (i < 0 || i >= ybar.n()) throw Error(ErrorKind::SizeMismatch, "partition label outside the matrix");
    s.Y11_11 = ybar.sub(ii);
    s.Y11_12 = DenseMatrix::Zero(3 * ii.size(), 3 * bi.size());
    for (size_t a = 0; a < ii.size(); ++a)
        for (size_t b = 0; b < bi.size(); ++b) s.Y11_12.block<3, 3>(3 * a, 3 * b) = ybar.blk(ii[a], bi[b]);
    s.Ybar_prime = normalize_diagonal(ybar.sub(bi));
    return s;
}

std::vector<CliquePiece> split_cliques(const BlockMatrix& ybar_prime, const std::vector<int>& labels_in,
                                       double zero_tol) {
    std::vector<int> labels = labels_in;
    if (labels.empty()) {
        labels.resize(ybar_prime.n());
        std::iota(labels.begin(), labels.end(), 1);
    }
    if (static_cast<int>(labels.size()) != ybar_prime.n())
        throw Error(ErrorKind::SizeMismatch, "one label per block required");
    const auto cover = cover_cliques(block_graph(ybar_prime, zero_tol));

    std::vector<int> owner(ybar_prime.n(), -1);  // first piece containing each block
    std::set<std::pair<int, int>> recorded;
    std::vector<CliquePiece> pieces;
    for (size_t l = 0; l < cover.cliques.size(); ++l) {
        const auto& k = cover.cliques[l];
        CliquePiece piece;
        piece.members = to_labels(k, labels);
        piece.Ybar_iso = normalize_diagonal(ybar_prime.sub(k));
        for (int v : k)
            if (owner[v] >= 0) piece.attachments.push_back(SharedNode{labels[v]});
        for (auto [a, b] : cover.tree_edges) {
            for (auto [u, w] : {std::make_pair(a, b), std::make_pair(b, a)}) {
                if (!std::binary_search(k.begin(), k.end(), u) || owner[w] < 0) continue;
                if (!recorded.insert({std::min(a, b), std::max(a, b)}).second) continue;
                piece.attachments.push_back(AdjacentLine{labels[u], labels[w], ybar_prime.block(u, w)});
            }
        }
        if (piece.attachments.empty()) piece.attachments.push_back(Disconnected{});
        for (int v : k)
            if (owner[v] < 0) owner[v] = static_cast<int>(l);
        pieces.push_back(std::move(piece));
    }
    for (int v = 0; v < ybar_prime.n(); ++v)
        if (owner[v] < 0)
            throw Error(ErrorKind::MalformedReduction,
                        "boundary node " + std::to_string(labels[v]) + " belongs to no clique");
    return pieces;
}

LabeledMatrix recombine_matrices(const std::vector<std::pair<CliquePiece, LabeledMatrix>>& pieces) {
    LabelSpace space;
    for (const auto& [piece, m] : pieces) {
        if (m.labels.size() != m.roles.size() || static_cast<int>(m.labels.size()) != m.Y.n())
            throw Error(ErrorKind::SizeMismatch, "piece labels do not match its matrix");
        for (size_t i = 0; i < m.labels.size(); ++i) space.add(m.labels[i], m.roles[i]);
    }
    space.finish();
    LabeledMatrix out = space.empty_matrix();

    for (size_t p = 0; p < pieces.size(); ++p) {
        const auto& [piece, m] = pieces[p];
        for (size_t a = 0; a < m.labels.size(); ++a)
            for (size_t b = 0; b < m.labels.size(); ++b)
                out.Y.blk(space.pos[m.labels[a]], space.pos[m.labels[b]]) +=
                    m.Y.blk(static_cast<int>(a), static_cast<int>(b));

        auto in_piece = [&](size_t q, int label) {
            const auto& ls = pieces[q].second.labels;
            return std::find(ls.begin(), ls.end(), label) != ls.end();
        };
        auto in_other = [&](int label) {
            for (size_t q = 0; q < pieces.size(); ++q)
                if (q != p && in_piece(q, label)) return true;
            return false;
        };
        for (const auto& att : piece.attachments) {
            if (const auto* sh = std::get_if<SharedNode>(&att)) {
                if (!in_piece(p, sh->label) || !in_other(sh->label))
                    throw Error(ErrorKind::InconsistentAttachment,
                                "shared node " + std::to_string(sh->label) + " is not in two pieces");
            } else if (const auto* ln = std::get_if<AdjacentLine>(&att)) {
                if (!in_piece(p, ln->i) || !in_other(ln->j))
                    throw Error(ErrorKind::InconsistentAttachment,
                                "line " + std::to_string(ln->i) + "-" + std::to_string(ln->j) +
                                    " does not join this piece to another");
                const int i = space.pos[ln->i], j = space.pos[ln->j];
                out.Y.blk(i, j) += ln->W12;
                out.Y.blk(j, i) += ln->W12.transpose();
                out.Y.blk(i, i) -= ln->W12;
                out.Y.blk(j, j) -= ln->W12.transpose();
            }
        }
    }
    return out;
}

LabeledMatrix recombine(const std::vector<std::pair<CliquePiece, RadialNetwork>>& pieces_identified) {
    std::vector<std::pair<CliquePiece, LabeledMatrix>> mats;
    for (const auto& [piece, net] : pieces_identified) mats.emplace_back(piece, labeled_from_network(net));
    return recombine_matrices(mats);
}

LabeledMatrix reattach_internal(const LabeledMatrix& y_prime, const Stripped& stripped) {
    const int ni = static_cast<int>(stripped.internal.size());
    const int nb = static_cast<int>(stripped.boundary.size());
    if (stripped.Y11_11.n() != ni || stripped.Y11_12.rows() != 3 * ni || stripped.Y11_12.cols() != 3 * nb)
        throw Error(ErrorKind::SizeMismatch, "stripped blocks do not match the internal/boundary label lists");
    LabelSpace space;
    for (size_t i = 0; i < y_prime.labels.size(); ++i) space.add(y_prime.labels[i], y_prime.roles[i]);
    for (int l : stripped.internal) space.add(l, Role::Measured);
    for (int l : stripped.boundary)
        if (!space.roles.count(l))
            throw Error(ErrorKind::SizeMismatch, "boundary label " + std::to_string(l) + " missing from Y'");
    space.finish();
    LabeledMatrix out = space.empty_matrix();

    const int np = static_cast<int>(y_prime.labels.size());
    for (int a = 0; a < np; ++a)
        for (int b = 0; b < np; ++b)
            out.Y.blk(space.pos[y_prime.labels[a]], space.pos[y_prime.labels[b]]) = y_prime.Y.blk(a, b);
    for (int a = 0; a < ni; ++a)
        for (int b = 0; b < ni; ++b)
            out.Y.blk(space.pos[stripped.internal[a]], space.pos[stripped.internal[b]]) = stripped.Y11_11.blk(a, b);
    for (int a = 0; a < ni; ++a)
        for (int b = 0; b < nb; ++b) {
            const PhaseBlock w = stripped.Y11_12.block<3, 3>(3 * a, 3 * b);
            const int i = space.pos[stripped.internal[a]], j = space.pos[stripped.boundary[b]];
            out.Y.blk(i, j) = w;
            out.Y.blk(j, i) = w.transpose();
            out.Y.blk(j, j) -= w;
        }
    return out;
}

DecompositionPlan plan_decomposition(const BlockMatrix& ybar, double zero_tol) {
    DecompositionPlan plan;
    const Classification c = classify_from_reduction(ybar, zero_tol);
    plan.partition = c.partition;
    plan.stripped = strip_internal(ybar, c.partition);
    plan.pieces = split_cliques(plan.stripped.Ybar_prime, plan.stripped.boundary, zero_tol);

    // Maximal subtrees: components of the non-clique edges.
    std::map<int, std::vector<int>> adj;
    for (auto [a, b] : c.tree_edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::set<int> seen;
    for (auto& [start, _] : adj) {
        if (seen.count(start)) continue;
        std::vector<std::pair<int, int>> edges;
        std::vector<int> stack{start};
        seen.insert(start);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : adj[v]) {
                if (v < w) edges.emplace_back(v, w);
                if (seen.insert(w).second) stack.push_back(w);
            }
        }
        std::sort(edges.begin(), edges.end());
        plan.trees.push_back(std::move(edges));
    }
    return plan;
}

IdentifyReport identify_full_report(const BlockMatrix& ybar, const Tolerances& tol) {
    IdentifyReport rep;
    try {
        rep.plan = plan_decomposition(ybar, tol.tau_zero);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("steps 1-2 (classify/strip/split): ") + e.what());
    }
    int next_hidden = ybar.n() + 1;
    std::vector<std::pair<CliquePiece, RadialNetwork>> identified;
    for (const auto& piece : rep.plan.pieces) {
        IdentifyOptions opt;
        opt.tol = tol;
        opt.labels = piece.members;
        opt.first_hidden_label = next_hidden;
        try {
            RadialNetwork net = identify_clique(piece.Ybar_iso, opt);
            next_hidden += static_cast<int>(net.hidden().size());
            identified.emplace_back(piece, std::move(net));
        } catch (const Error& e) {
            std::string who;
            for (int m : piece.members) who += (who.empty() ? "" : ",") + std::to_string(m);
            throw Error(e.kind(), "step 3 (clique {" + who + "}): " + e.what());
        }
    }
    LabeledMatrix full;
    try {
        full = reattach_internal(recombine(identified), rep.plan.stripped);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("steps 4-5 (recombine/reattach): ") + e.what());
    }
    rep.network = network_from_admittance(full.Y, full.labels, full.roles, tol.tau_zero);
    const auto v = validate(rep.network);
    if (!v.empty())
        throw Error(ErrorKind::AssumptionBreach, "recovered network fails validation: " + v.front().message);
    rep.round_trip_error = rel_diff(kron_reduce_network(rep.network), ybar);
    return rep;
}

RadialNetwork identify_full(const BlockMatrix& ybar, const Tolerances& tol) {
    auto rep = identify_full_report(ybar, tol);
    if (!(rep.round_trip_error <= tol.round_trip_tol))
        throw Error(ErrorKind::RoundTripMismatch,
                    "reduction of the recovered network differs from the input by " +
                        std::to_string(rep.round_trip_error));
    return std::move(rep.network);
}

}  // namespace kronrev
