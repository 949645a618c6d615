#include <doctest.h>

#include "mlcirc/derivative.hpp"

#include "oracles.hpp"

using namespace mlcirc;

TEST_CASE("transform on pinned circuits") {
    Fp f(101);
    {
        // x1 x2 + x3 -> derivatives (x2, x1, 1)
        Circuit<Fp> c(f, 3);
        auto sum = c.add_add(c.add_mul(c.add_var(1), c.add_var(2)), c.add_var(3));
        c.add_output(sum);
        auto dc = bs_transform(c);
        REQUIRE(dc.base.outputs().size() == 3);
        auto d1 = expand(dc.base, dc.base.outputs()[0]);
        auto d2 = expand(dc.base, dc.base.outputs()[1]);
        auto d3 = expand(dc.base, dc.base.outputs()[2]);
        CHECK(d1.terms().size() == 1);
        CHECK(d1.coeff(0b010) == 1);
        CHECK(d2.coeff(0b001) == 1);
        CHECK(d3.coeff(0) == 1);
        CHECK(dc.base.size() <= 5 * c.size());
    }
    {
        // constant circuit: every derivative is zero
        Circuit<Fp> c(f, 2);
        c.add_output(c.add_const(f.from_int(9)));
        auto dc = bs_transform(c);
        REQUIRE(dc.base.outputs().size() == 2);
        for (auto o : dc.base.outputs()) CHECK(expand(dc.base, o).is_zero());
    }
    {
        // non-multilinear input is refused
        Circuit<Fp> c(f, 1);
        auto x1 = c.add_var(1);
        c.add_output(c.add_mul(x1, x1));
        CHECK_THROWS_AS(bs_transform(c), DomainError);
    }
}

TEST_CASE("transform against the restriction oracle, with all four guarantees") {
    Fp f(101);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        int n = 3 + static_cast<int>(seed % 8); // 3..10
        auto c = oracle::random_multilinear_circuit(f, n, 10 + static_cast<int>(seed % 40), seed);
        auto dc = bs_transform(c); // constructor re-verifies the guarantees
        CHECK(dc.base.size() <= 5 * c.size());
        auto fpoly = expand(c, c.outputs()[0]);
        for (int i = 1; i <= n; ++i) {
            auto di = expand(dc.base, dc.base.outputs()[i - 1]);
            CHECK(di == oracle::derivative_by_restriction(fpoly, i));
        }
    }
}

TEST_CASE("reachable outputs: C_v matches reverse reachability and respects n - |X_v|") {
    Fp f(101);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        auto c = oracle::random_multilinear_circuit(f, 6, 20, seed);
        auto dc = bs_transform(c);
        auto cv = reachable_outputs(dc); // asserts |C_v| <= n - |X_v| internally
        auto xs = var_sets(dc.base);
        // spot re-check with an independent forward walk: v in C_v[i] iff
        // the i-th output reaches v
        for (int i = 1; i <= 6; ++i) {
            auto within = oracle::reachable_vars(dc.base, dc.base.outputs()[i - 1]);
            CHECK((within & (Mask{1} << (i - 1))) == 0); // x_i not below v_i
        }
        for (std::size_t v = 0; v < dc.base.size(); ++v) {
            for (int i : cv[v]) {
                // x_i never occurs below any gate of the i-th subcircuit
                CHECK((xs[v] & (Mask{1} << (i - 1))) == 0);
            }
        }
    }
}

TEST_CASE("transform is deterministic") {
    Fp f(101);
    auto c = oracle::random_multilinear_circuit(f, 7, 30, 3);
    auto a = bs_transform(c);
    auto b = bs_transform(c);
    REQUIRE(a.base.size() == b.base.size());
    for (std::size_t i = 0; i < a.base.size(); ++i) {
        CHECK(a.base.gates()[i].id == b.base.gates()[i].id);
        CHECK(a.base.gates()[i].op == b.base.gates()[i].op);
    }
    CHECK(a.base.outputs() == b.base.outputs());
}
