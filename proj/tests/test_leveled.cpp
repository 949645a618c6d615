#include <doctest.h>

#include "mlcirc/leveled.hpp"

#include "oracles.hpp"

using namespace mlcirc;

namespace {

// quadratic definition-following oracle
template <class F>
std::pair<std::set<long long>, std::set<long long>> leveled_oracle(const Circuit<F>& c, int k) {
    auto xs = var_sets(c);
    std::set<long long> lower, upper;
    const int n = c.n();
    for (std::size_t u = 0; u < c.size(); ++u) {
        int su = popcount(xs[u]);
        if (!(su > k && su < n - k)) continue;
        for (std::size_t v = 0; v < c.size(); ++v) {
            const auto& g = c.gates()[v];
            if (g.op != GateOp::Add && g.op != GateOp::Mul) continue;
            bool is_child = c.left_index(v) == u || c.right_index(v) == u;
            if (is_child && popcount(xs[v]) >= n - k) {
                lower.insert(c.gates()[u].id);
                upper.insert(g.id);
            }
        }
    }
    return {lower, upper};
}

// comb circuit x1 * (x2 * (x3 * (x4 * (x5 * x6))))
Circuit<Fp> comb6(const Fp& f) {
    Circuit<Fp> c(f, 6);
    long long acc = c.add_var(6);
    for (int i = 5; i >= 1; --i) acc = c.add_mul(c.add_var(i), acc);
    c.add_output(acc);
    return c;
}

} // namespace

TEST_CASE("leveled sets on the comb circuit") {
    Fp f(101);
    auto c = comb6(f);
    auto ls = leveled_sets(c, 1);
    auto xs = var_sets(c);
    // lower: the gate with X = {3,4,5,6} (size 4 < 5 = n-k, parent has 5)
    REQUIRE(ls.lower.size() == 1);
    CHECK(popcount(xs[c.index_of(ls.lower[0])]) == 4);
    REQUIRE(ls.upper.size() == 1);
    CHECK(popcount(xs[c.index_of(ls.upper[0])]) == 5);

    // k = 0: gates with 0 < |X| < n having a parent with X = [n]
    auto l0 = leveled_sets(c, 0);
    REQUIRE(l0.upper.size() == 1);
    CHECK(xs[c.index_of(l0.upper[0])] == (Mask{1} << 6) - 1);
}

TEST_CASE("leveled sets agree with the quadratic oracle") {
    Fp f(101);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        int n = 4 + static_cast<int>(seed % 5) * 2;
        auto c = oracle::random_multilinear_circuit(f, n, 25, seed);
        for (int k = 0; 2 * k < n; ++k) {
            auto ls = leveled_sets(c, k);
            auto [lo, up] = leveled_oracle(c, k);
            CHECK(std::set<long long>(ls.lower.begin(), ls.lower.end()) == lo);
            CHECK(std::set<long long>(ls.upper.begin(), ls.upper.end()) == up);
            CHECK(ls.lower.size() <= 2 * ls.upper.size());
        }
    }
}

TEST_CASE("decompose: single-product case") {
    Fp f(101);
    // f = (x1 + x2) * (x3 x4), k = 1, n = 4: the right factor is lower
    Circuit<Fp> c(f, 4);
    auto u = c.add_mul(c.add_var(3), c.add_var(4));
    auto w = c.add_add(c.add_var(1), c.add_var(2));
    auto root = c.add_mul(w, u);
    c.add_output(root);
    auto ls = leveled_sets(c, 1);
    REQUIRE(ls.lower.size() == 2); // both children sit between 1 and 3
    auto dec = decompose(c, 1, 1);
    CHECK(dec.pairs.size() == 2);
    CHECK(dec.residual.is_zero());
}

TEST_CASE("decompose: empty lower set leaves everything in the residual") {
    Fp f(101);
    Circuit<Fp> c(f, 4);
    auto s = c.add_add(c.add_var(1), c.add_var(2));
    c.add_output(s);
    // no gate has support >= n - k for k = 1 except nothing (root support 2)
    auto dec = decompose(c, 1, 1);
    CHECK(dec.pairs.empty());
    CHECK(dec.residual == expand(c, s));
    CHECK(dec.residual_degree == 1);
}

TEST_CASE("decompose identity on random circuits (verified by expansion)") {
    Fp f(101);
    int built = 0;
    for (std::uint64_t seed = 0; seed < 60 && built < 50; ++seed) {
        int n = 4 + static_cast<int>(seed % 4) * 2; // 4..10
        auto c = oracle::random_multilinear_circuit(f, n, 24, seed);
        // decompose() itself throws InvariantError if the identity fails;
        // reaching here means the expansion check passed
        auto dec = decompose(c, 1, 1);
        ++built;
        for (std::size_t j = 0; j < dec.pairs.size(); ++j)
            CHECK((dec.pairs[j].first.support_mask() & dec.pairs[j].second.support_mask()) == 0);
    }
    CHECK(built == 50);
}

TEST_CASE("full-rank polynomial defeats any claimed small collapse") {
    // circuit for (x1+x5)(x2+x6)(x3+x7)(x4+x8): rank 2^4 under Y = {1,2,3,4}
    // while the two-pair collapse budget at tau = 2 is 2*4 + 4 < 16, so the
    // reported comparison must fail -- the contradiction engine at work
    Fp f(101);
    Circuit<Fp> c(f, 8);
    std::vector<long long> factors;
    for (int i = 1; i <= 4; ++i) factors.push_back(c.add_add(c.add_var(i), c.add_var(i + 4)));
    c.add_output(c.add_nary(GateOp::Mul, factors));
    Partition part(8, 0b00001111);
    auto rep = rank_collapse_check(c, /*tau=*/2, /*k=*/1, part);
    CHECK(rep.actual_rank == 16);
    CHECK(rep.total_bound < 16);
    CHECK_FALSE(rep.collapse_bound_holds);
    // and the reason: Y balances the lower gates' variable sets
    bool any_unbalanced = false;
    for (const auto& pr : rep.pairs) any_unbalanced = any_unbalanced || pr.tau_unbalanced;
    CHECK_FALSE(any_unbalanced);
    for (const auto& pr : rep.pairs) CHECK(pr.bound_holds); // the exact per-pair bounds still hold
}

TEST_CASE("rank collapse report on a collapsing and a full-rank instance") {
    Fp f(101);
    {
        // low-degree residual only: bound = (n/2)^(d+1)
        Circuit<Fp> c(f, 4);
        c.add_output(c.add_add(c.add_var(1), c.add_var(2)));
        auto rep = rank_collapse_check(c, 1, 1, Partition(4, 0b0011));
        CHECK(rep.pairs.empty());
        CHECK(rep.residual_bound == 4); // (4/2)^(1+1)
        CHECK(rep.actual_rank == rep.residual_rank);
        CHECK(rep.collapse_bound_holds);
    }
    {
        // tau-unbalanced single pair: rank(g h) <= 2^(n/2 - tau)
        Circuit<Fp> c(f, 4);
        auto h = c.add_mul(c.add_var(1), c.add_var(2)); // X = {1,2}
        auto g = c.add_add(c.add_var(3), c.add_var(4));
        auto root = c.add_mul(h, g);
        c.add_output(root);
        Partition part(4, 0b0011); // Y = {1,2}: d_Y({1,2}) = 1 >= tau = 1
        auto rep = rank_collapse_check(c, 1, 1, part);
        REQUIRE(rep.pairs.size() == 2);
        for (const auto& pr : rep.pairs) {
            CHECK(pr.bound_holds);
            CHECK(pr.tau_unbalanced);
            CHECK(pr.actual_rank <= (std::uint64_t{1} << (4 / 2 - 1)));
        }
    }
}
