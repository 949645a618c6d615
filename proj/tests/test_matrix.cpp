#include <doctest.h>

#include "mlcirc/matrix.hpp"
#include "mlcirc/rng.hpp"

#include "oracles.hpp"

using namespace mlcirc;

namespace {

ExactMatrix<Fp> fp_matrix(std::uint64_t p, std::size_t rows, std::size_t cols,
                          std::initializer_list<std::uint64_t> vals) {
    ExactMatrix<Fp> m(Fp(p), rows, cols);
    auto it = vals.begin();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = *it++ % p;
    return m;
}

ExactMatrix<Fp> random_fp(std::uint64_t p, std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed, 5);
    ExactMatrix<Fp> m(Fp(p), rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rng.next_below(p);
    return m;
}

} // namespace

TEST_CASE("rank on pinned examples") {
    CHECK(rank(fp_matrix(5, 2, 2, {1, 0, 0, 1})) == 2);
    CHECK(rank(fp_matrix(5, 3, 4, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0})) == 0);
    // second row is twice the first
    CHECK(rank(fp_matrix(5, 2, 2, {1, 2, 2, 4})) == 1);
    // mod-dependent rank: [[1,1],[1,3]] is singular mod 2 only
    CHECK(rank(fp_matrix(2, 2, 2, {1, 1, 1, 3})) == 1);
    CHECK(rank(fp_matrix(5, 2, 2, {1, 1, 1, 3})) == 2);

    ExactMatrix<Rat> q(Rat{}, 2, 2);
    Rat r;
    q.at(0, 0) = r.from_string("1/2");
    q.at(0, 1) = r.from_string("1/3");
    q.at(1, 0) = r.from_string("3/2");
    q.at(1, 1) = r.from_string("1"); // row1 = 3 * row0
    CHECK(rank(q) == 1);
    CHECK(rank_serial(q) == 1);
    q.at(1, 1) = r.from_string("2");
    CHECK(rank(q) == 2);
    CHECK(rank_serial(q) == 2);
}

TEST_CASE("rank agrees with the textbook oracle and with the serial path") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        std::uint64_t p = seed % 3 == 0 ? 2 : seed % 3 == 1 ? 5 : 101;
        std::size_t rows = 1 + seed % 9, cols = 1 + (seed * 7) % 9;
        auto m = random_fp(p, rows, cols, seed);
        std::vector<std::vector<std::uint64_t>> raw(rows, std::vector<std::uint64_t>(cols));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) raw[r][c] = m.at(r, c);
        auto expect = oracle::rank_fp(raw, p);
        CHECK(rank(m) == expect);
        CHECK(rank_serial(m) == expect);
        CHECK(rank(m.transpose()) == expect);
    }
}

TEST_CASE("rank over F_p never exceeds rank over Q for integer matrices") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed, 6);
        std::size_t n = 2 + seed % 6;
        ExactMatrix<Fp> mp(Fp(seed % 2 ? 3 : 2), n, n);
        ExactMatrix<Rat> mq(Rat{}, n, n);
        Rat r;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                long long v = static_cast<long long>(rng.next_below(9)) - 4;
                mp.at(i, j) = mp.field().from_int(v);
                mq.at(i, j) = r.from_int(v);
            }
        }
        CHECK(rank(mp) <= rank(mq));
        CHECK(rank(mq) == rank_serial(mq));
        CHECK(rank(mq.transpose()) == rank(mq));
    }
}

TEST_CASE("nullspace: dimensions, exactness, and the unsupported context") {
    // identity has empty nullspace
    CHECK(nullspace_basis(fp_matrix(5, 2, 2, {1, 0, 0, 1})).empty());
    // [1 1] over F_2 forces (1,1)
    auto b = nullspace_basis(fp_matrix(2, 1, 2, {1, 1}));
    REQUIRE(b.size() == 1);
    CHECK(b[0] == std::vector<Fp::elem>{1, 1});

    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        std::uint64_t p = seed % 2 ? 3 : 101;
        std::size_t rows = 1 + seed % 6, cols = 1 + (seed * 5) % 8;
        auto m = random_fp(p, rows, cols, seed + 100);
        auto basis = nullspace_basis(m);
        CHECK(basis.size() == m.cols() - rank(m));
        Fp f(p);
        for (const auto& v : basis) {
            for (std::size_t r = 0; r < m.rows(); ++r) {
                std::uint64_t acc = 0;
                for (std::size_t c = 0; c < m.cols(); ++c) acc = f.add(acc, f.mul(m.at(r, c), v[c]));
                CHECK(acc == 0);
            }
        }
    }

    ExactMatrix<Rat> q(Rat{}, 1, 1);
    CHECK_THROWS_AS(nullspace_basis(q), DomainError);
}

TEST_CASE("fraction-free path survives entries that overflow machine words") {
    // Hilbert-like 8x8 is notoriously ill-conditioned in floating point but
    // exact arithmetic sees full rank.
    ExactMatrix<Rat> h(Rat{}, 8, 8);
    Rat r;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) h.at(i, j) = mpq_class(1, i + j + 1);
    CHECK(rank(h) == 8);
}
