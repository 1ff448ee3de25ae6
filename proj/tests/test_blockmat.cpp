#include <catch_amalgamated.hpp>

#include "support/oracles.hpp"

using namespace kronrev;

namespace {

const PhaseBlock I3 = PhaseBlock::Identity();

BlockMatrix random_admittance(int n, std::mt19937_64& rng) {
    // random labelled tree via parent pointers
    BlockMatrix y(n);
    for (int i = 1; i < n; ++i) {
        const int p = std::uniform_int_distribution<int>(0, i - 1)(rng);
        const PhaseBlock b = oracle::random_line(rng);
        y.blk(i, p) -= b;
        y.blk(p, i) -= b;
        y.blk(i, i) += b;
        y.blk(p, p) += b;
    }
    return y;
}

}  // namespace

TEST_CASE("block symmetry and row sums") {
    std::mt19937_64 rng(1);
    BlockMatrix one(1);
    one.set(0, 0, oracle::random_line(rng));
    CHECK(is_block_symmetric(one, 1e-10));

    PhaseBlock b;
    b << 1, 2, 3, 4, 5, 6, 7, 8, cplx(0, 9);
    BlockMatrix two(2);
    two.set(0, 1, b);
    two.set(1, 0, b);
    CHECK(is_block_symmetric(two, 1e-10));
    two.set(1, 0, 2.0 * b);
    CHECK_FALSE(is_block_symmetric(two, 1e-10));

    const BlockMatrix line = oracle::star_matrix({I3}).sub({0, 1});
    CHECK(has_zero_row_block_sums(line, 1e-12));
    CHECK_FALSE(has_zero_row_block_sums(BlockMatrix::identity(3), 1e-12));
}

TEST_CASE("invert_block") {
    CHECK(invert_block(I3).isApprox(I3));
    CHECK(invert_block(2.0 * I3).isApprox(0.5 * I3));
    PhaseBlock d = PhaseBlock::Zero();
    d.diagonal() << cplx(1, 1), 2, 1;
    PhaseBlock expect = PhaseBlock::Zero();
    expect.diagonal() << cplx(0.5, -0.5), 0.5, 1;
    CHECK((invert_block(d) - expect).norm() < 1e-15);

    PhaseBlock sing = PhaseBlock::Zero();
    sing(0, 0) = 1;
    CHECK_THROWS_AS(invert_block(sing), Error);

    std::mt19937_64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const PhaseBlock b = oracle::random_line(rng);
        CHECK((b * invert_block(b) - I3).norm() < 1e-12);
    }
}

TEST_CASE("invert_principal_submatrix") {
    const PhaseBlock y = I3;
    const BlockMatrix line = oracle::star_matrix({y}).sub({0, 1});
    CHECK(invert_principal_submatrix(line, {0}).block(0, 0).isApprox(y.inverse()));
    try {
        invert_principal_submatrix(line, {0, 1});
        FAIL("expected InvalidSubset");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSubset);
    }

    BlockMatrix path(3);  // 1-2-3 with unit lines
    path.set(0, 0, I3);
    path.set(1, 1, 2.0 * I3);
    path.set(2, 2, I3);
    path.set(0, 1, -I3);
    path.set(1, 0, -I3);
    path.set(1, 2, -I3);
    path.set(2, 1, -I3);
    const BlockMatrix inv = invert_principal_submatrix(path, {1, 2});
    const DenseMatrix prod = path.sub({1, 2}).dense() * inv.dense();
    CHECK((prod - DenseMatrix::Identity(6, 6)).norm() < 1e-12);
}

TEST_CASE("schur_complement examples") {
    std::mt19937_64 rng(5);
    const BlockMatrix y = random_admittance(5, rng);
    CHECK(schur_complement(y, {0, 1, 2, 3, 4}) == y);

    BlockMatrix diag(2);
    const PhaseBlock b1 = oracle::random_line(rng), b2 = oracle::random_line(rng);
    diag.set(0, 0, b1);
    diag.set(1, 1, b2);
    CHECK(schur_complement(diag, {0}).block(0, 0).isApprox(b1));

    // star, y13 = I, y23 = 2I, centre hidden
    const BlockMatrix s = oracle::star_matrix({I3, 2.0 * I3});
    const BlockMatrix r = schur_complement(s, {0, 1});
    const double t = 2.0 / 3.0;
    CHECK((r.block(0, 0) - t * I3).norm() < 1e-14);
    CHECK((r.block(0, 1) + t * I3).norm() < 1e-14);
    CHECK((r.block(1, 0) + t * I3).norm() < 1e-14);
    CHECK((r.block(1, 1) - t * I3).norm() < 1e-14);
    CHECK(oracle::rel(r.dense(), oracle::dense_schur(s, {0, 1}).dense()) < 1e-14);
}

TEST_CASE("schur_complement agrees with the inverse oracle and keeps structure") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 100; ++t) {
        const int n = std::uniform_int_distribution<int>(3, 12)(rng);
        const BlockMatrix y = random_admittance(n, rng);
        std::vector<int> keep;
        for (int i = 0; i < n; ++i)
            if (std::bernoulli_distribution(0.6)(rng)) keep.push_back(i);
        // a single kept node reduces to the zero block, so relative checks need two
        if (keep.size() < 2 || static_cast<int>(keep.size()) == n) continue;
        const BlockMatrix r = schur_complement(y, keep);
        REQUIRE(oracle::rel(r.dense(), oracle::dense_schur(y, keep).dense()) < 1e-10);
        CHECK(is_complex_symmetric(r, 1e-10));
        CHECK(has_zero_row_block_sums(r, 1e-10));
        for (int i = 0; i < r.n(); ++i) CHECK(is_symmetric_block(r.block(i, i), 1e-10));
        // strict principal submatrices have positive definite real part
        if (r.n() >= 2) {
            const BlockMatrix strict = r.sub({0});
            CHECK(has_pd_real_part(strict.block(0, 0)));
        }
    }
}

TEST_CASE("schur_complement commutes with relabelling") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 30; ++t) {
        const int n = 7;
        const BlockMatrix y = random_admittance(n, rng);
        std::vector<int> p(n);
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), rng);
        const BlockPermutation perm(p);
        const std::vector<int> keep = {0, 2, 3, 5};
        std::vector<int> pkeep;
        for (int k : keep) pkeep.push_back(p[k]);
        std::vector<int> sorted = pkeep;
        std::sort(sorted.begin(), sorted.end());
        // restrict p to keep: rank of p(k) among the kept images
        std::vector<int> restricted;
        for (int k : keep)
            restricted.push_back(static_cast<int>(std::find(sorted.begin(), sorted.end(), p[k]) - sorted.begin()));
        const BlockMatrix lhs = apply_permutation(schur_complement(y, keep), BlockPermutation(restricted));
        const BlockMatrix rhs = schur_complement(apply_permutation(y, perm), sorted);
        CHECK(oracle::rel(lhs.dense(), rhs.dense()) < 1e-9);
    }
}

TEST_CASE("block inverse identities") {
    CHECK(block_inverse_identities_check(BlockMatrix::identity(4), 2));
    std::mt19937_64 rng(17);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        const int n = std::uniform_int_distribution<int>(3, 12)(rng);
        const BlockMatrix y = random_admittance(n + 1, rng);
        std::vector<int> rest(n);
        std::iota(rest.begin(), rest.end(), 1);
        const BlockMatrix a = y.sub(rest);
        const int split = std::uniform_int_distribution<int>(1, n - 1)(rng);
        CHECK(block_inverse_identities_check(a, split));
        ++checked;
    }
    CHECK(checked == 200);
    std::mt19937_64 r2(19);
    try {
        block_inverse_identities_check(random_admittance(4, r2), 2);
        FAIL("expected SingularSubmatrix");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularSubmatrix);
    }
}

TEST_CASE("apply_permutation") {
    std::mt19937_64 rng(23);
    const BlockMatrix y = random_admittance(6, rng);
    CHECK(apply_permutation(y, BlockPermutation::identity(6)) == y);

    BlockMatrix two(2);
    const PhaseBlock b1 = oracle::random_line(rng), b2 = oracle::random_line(rng), b3 = oracle::random_line(rng);
    two.set(0, 0, b1);
    two.set(1, 1, b2);
    two.set(0, 1, b3);
    two.set(1, 0, b3.transpose());
    const BlockMatrix sw = apply_permutation(two, BlockPermutation({1, 0}));
    CHECK(sw.block(0, 0) == b2);
    CHECK(sw.block(1, 1) == b1);
    CHECK(sw.block(1, 0) == b3);

    std::vector<int> p(6);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    const BlockPermutation perm(p);
    CHECK(apply_permutation(apply_permutation(y, perm), perm.inverse()) == y);
    CHECK(perm.compose(perm.inverse()) == BlockPermutation::identity(6));
}

TEST_CASE("normalize_diagonal") {
    std::mt19937_64 rng(29);
    const BlockMatrix y = random_admittance(5, rng);
    CHECK(oracle::rel(normalize_diagonal(y).dense(), y.dense()) < 1e-15);

    const PhaseBlock b = oracle::random_line(rng);
    BlockMatrix a(2);
    a.set(0, 0, 2.0 * b);
    a.set(1, 1, 2.0 * b);
    a.set(0, 1, -b);
    a.set(1, 0, -b);
    const BlockMatrix n = normalize_diagonal(a);
    CHECK((n.block(0, 0) - b).norm() < 1e-15);
    CHECK((n.block(1, 1) - b).norm() < 1e-15);
    CHECK(n.block(0, 1) == -b);

    // two-clique chain sharing nothing: extracted clique gets zero row sums
    BlockMatrix w(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) w.set(i, j, i == j ? PhaseBlock(5.0 * b) : PhaseBlock(-b));
    CHECK(has_zero_row_block_sums(normalize_diagonal(w), 1e-13));
}
