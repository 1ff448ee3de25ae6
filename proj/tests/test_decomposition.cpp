#include <catch_amalgamated.hpp>

#include "support/oracles.hpp"

using namespace kronrev;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Format;
}

std::set<std::set<int>> as_sets(const std::vector<std::vector<int>>& v) {
    std::set<std::set<int>> out;
    for (const auto& k : v) out.insert(std::set<int>(k.begin(), k.end()));
    return out;
}

// Identification stubbed out: every piece comes back as its own matrix.
LabeledMatrix recombine_stub(const std::vector<CliquePiece>& pieces) {
    std::vector<std::pair<CliquePiece, LabeledMatrix>> mats;
    for (const auto& p : pieces)
        mats.emplace_back(p, LabeledMatrix{p.members, std::vector<Role>(p.members.size(), Role::Measured),
                                           p.Ybar_iso});
    return recombine_matrices(mats);
}

RadialNetwork build(int measured, int hidden, const std::vector<std::pair<int, int>>& edges, uint64_t seed) {
    std::mt19937_64 rng(seed);
    const PhaseBlock y = oracle::random_line(rng);
    std::uniform_real_distribution<double> lam(0.5, 2.0);
    RadialNetwork net;
    for (int i = 1; i <= measured; ++i) net.nodes.push_back({i, Role::Measured});
    for (int i = 1; i <= hidden; ++i) net.nodes.push_back({measured + i, Role::Hidden});
    for (auto [a, b] : edges) {
        const double l = lam(rng);
        net.edges.push_back({a, b, y / l, l});
    }
    net.y_unit = y;
    REQUIRE(validate(net).empty());
    return net;
}

void check_measured_labels(const RadialNetwork& net) {
    const auto m = net.measured();
    for (size_t i = 0; i < m.size(); ++i) REQUIRE(m[i] == static_cast<int>(i) + 1);
}

}  // namespace

TEST_CASE("classify a pure tree") {
    const auto tree = generate_radial(7, 0, true, 3);
    const BlockMatrix y = admittance_from_network(tree);
    const auto c = classify_from_reduction(y);
    CHECK(c.cliques.empty());
    CHECK(c.partition.measured_boundary.empty());
    CHECK(c.partition.measured_internal.size() == 7);
    CHECK(c.tree_edges.size() == tree.edges.size());
    const auto plan = plan_decomposition(y);
    CHECK(plan.pieces.empty());
    REQUIRE(plan.trees.size() == 1);
    CHECK(plan.trees[0].size() == 6);
}

TEST_CASE("classification matches the generator and a clique oracle") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 pick(seed);
        const int h = std::uniform_int_distribution<int>(1, 4)(pick);
        const int m = std::uniform_int_distribution<int>(h + 2, 12)(pick);
        const auto net = seed % 3 == 0 ? generate_multi_clique({2, 30, true}, seed) : generate_radial(m, h, true, seed);
        check_measured_labels(net);
        const BlockMatrix ybar = kron_reduce_network(net);
        const auto c = classify_from_reduction(ybar);
        const auto truth = partition_of(net);
        INFO("seed " << seed);
        CHECK(c.partition.measured_boundary == truth.measured_boundary);
        CHECK(c.partition.measured_internal == truth.measured_internal);
        CHECK(as_sets(c.cliques) == oracle::maximal_cliques(ybar, 1e-9));
        for (size_t k = 1; k < c.cliques.size(); ++k) CHECK(c.cliques[k - 1] < c.cliques[k]);
    }
}

TEST_CASE("split then recombine and strip then reattach are exact") {
    for (uint64_t seed = 0; seed < 60; ++seed) {
        const auto net = seed % 2 ? generate_multi_clique({}, seed) : generate_radial(14, 4, true, seed);
        check_measured_labels(net);
        const BlockMatrix ybar = kron_reduce_network(net);
        const auto plan = plan_decomposition(ybar);
        INFO("seed " << seed);

        const LabeledMatrix yp = recombine_stub(plan.pieces);
        CHECK(yp.labels == plan.stripped.boundary);
        CHECK(oracle::rel(yp.Y.dense(), plan.stripped.Ybar_prime.dense()) <= 1e-12);

        const LabeledMatrix full = reattach_internal(yp, plan.stripped);
        REQUIRE(full.Y.n() == ybar.n());
        for (size_t i = 0; i < full.labels.size(); ++i) CHECK(full.labels[i] == static_cast<int>(i) + 1);
        CHECK(oracle::rel(full.Y.dense(), ybar.dense()) <= 1e-12);

        for (const auto& p : plan.pieces) {
            CHECK(has_zero_row_block_sums(p.Ybar_iso, 1e-12));
            CHECK(p.members.size() >= 3);
        }
    }
}

TEST_CASE("attachment cases") {
    SECTION("disconnected") {
        // two stars with no line between them
        const auto a = kron_reduce_network(build(3, 1, {{1, 4}, {2, 4}, {3, 4}}, 1));
        const auto b = kron_reduce_network(build(3, 1, {{1, 4}, {2, 4}, {3, 4}}, 2));
        BlockMatrix ybar(6);
        ybar.dense().topLeftCorner(9, 9) = a.dense();
        ybar.dense().bottomRightCorner(9, 9) = b.dense();
        const auto pieces = split_cliques(ybar);
        REQUIRE(pieces.size() == 2);
        for (const auto& p : pieces) {
            REQUIRE(p.attachments.size() == 1);
            CHECK(std::holds_alternative<Disconnected>(p.attachments[0]));
        }
        CHECK(oracle::rel(recombine_stub(pieces).Y.dense(), ybar.dense()) <= 1e-12);
    }
    SECTION("adjacent line") {
        // measured 3 and 4 joined by a line; each hangs off its own hidden node
        const auto net = build(6, 2, {{1, 7}, {2, 7}, {3, 7}, {4, 8}, {5, 8}, {6, 8}, {3, 4}}, 3);
        const BlockMatrix ybar = kron_reduce_network(net);
        const auto pieces = split_cliques(ybar);
        REQUIRE(pieces.size() == 2);
        CHECK(std::holds_alternative<Disconnected>(pieces[0].attachments[0]));
        REQUIRE(pieces[1].attachments.size() == 1);
        const auto* line = std::get_if<AdjacentLine>(&pieces[1].attachments[0]);
        REQUIRE(line);
        CHECK(line->i == 4);
        CHECK(line->j == 3);
        CHECK((line->W12 - ybar.block(3, 2)).norm() == 0.0);
        CHECK(describe(pieces[1].attachments[0]) == "line 4-3");
        CHECK(compare_up_to_hidden_relabeling(net, identify_full(ybar), 1e-8));
    }
    SECTION("shared node") {
        // measured 3 is a neighbour of both hidden nodes
        const auto net = build(5, 2, {{1, 6}, {2, 6}, {3, 6}, {3, 7}, {4, 7}, {5, 7}}, 4);
        const BlockMatrix ybar = kron_reduce_network(net);
        const auto pieces = split_cliques(ybar);
        REQUIRE(pieces.size() == 2);
        CHECK(pieces[0].members == std::vector<int>{1, 2, 3});
        CHECK(pieces[1].members == std::vector<int>{3, 4, 5});
        REQUIRE(pieces[1].attachments.size() == 1);
        CHECK(std::get<SharedNode>(pieces[1].attachments[0]).label == 3);
        CHECK(compare_up_to_hidden_relabeling(net, identify_full(ybar), 1e-8));
    }
}

TEST_CASE("identify_full round trip") {
    for (uint64_t seed = 0; seed < 100; ++seed) {
        const auto net = seed % 2 ? generate_multi_clique({}, seed) : generate_radial(12, 4, true, seed);
        const BlockMatrix ybar = kron_reduce_network(net);
        INFO("seed " << seed);
        const auto rep = identify_full_report(ybar);
        CHECK(rep.round_trip_error <= 1e-8);
        CHECK(compare_up_to_hidden_relabeling(net, rep.network, 1e-8));
        CHECK(rep.network.hidden().size() == net.hidden().size());
        for (int hl : rep.network.hidden()) CHECK(hl > ybar.n());
    }
    // nothing hidden: the tree comes back as is
    const auto tree = generate_radial(6, 0, true, 2);
    CHECK(compare_up_to_hidden_relabeling(tree, identify_full(admittance_from_network(tree)), 1e-12));
}

TEST_CASE("malformed reductions are rejected") {
    // {1,2,3} and {2,3,4} are both complete but 1 and 4 are not adjacent
    const PhaseBlock I3 = PhaseBlock::Identity();
    BlockMatrix y(4);
    const std::vector<std::pair<int, int>> e = {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}};
    for (auto [a, b] : e) {
        y.set(a, b, -I3);
        y.set(b, a, -I3);
    }
    y = normalize_diagonal(y);
    CHECK(kind_of([&] { classify_from_reduction(y); }) == ErrorKind::MalformedReduction);
    CHECK(kind_of([&] { identify_full(y); }) == ErrorKind::MalformedReduction);

    auto asym = kron_reduce_network(generate_radial(5, 1, true, 1));
    asym.blk(0, 1) += 0.1 * I3;
    CHECK(kind_of([&] { classify_from_reduction(asym); }) == ErrorKind::MalformedReduction);

    const auto pieces = split_cliques(kron_reduce_network(build(5, 2, {{1, 6}, {2, 6}, {3, 6}, {3, 7}, {4, 7}, {5, 7}}, 5)));
    std::vector<std::pair<CliquePiece, LabeledMatrix>> mats;
    for (const auto& p : pieces)
        mats.emplace_back(p, LabeledMatrix{p.members, std::vector<Role>(p.members.size(), Role::Measured), p.Ybar_iso});
    mats[1].first.attachments = {SharedNode{4}};
    CHECK(kind_of([&] { recombine_matrices(mats); }) == ErrorKind::InconsistentAttachment);
}
