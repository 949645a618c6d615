#include <doctest.h>

#include "mlcirc/fullrank.hpp"

using namespace mlcirc;

TEST_CASE("construction shape: counts and the increasing pairing rule") {
    auto f2 = fullrank_build(2);
    REQUIRE(f2.terms.size() == 2);
    CHECK(f2.terms[0].b_mask == 0b01);
    CHECK(f2.terms[1].b_mask == 0b10);
    for (const auto& t : f2.terms) {
        REQUIRE(t.pairs.size() == 1);
        CHECK(((t.pairs[0] == std::pair{1, 2}) || (t.pairs[0] == std::pair{2, 1})));
    }

    auto f4 = fullrank_build(4);
    CHECK(f4.terms.size() == 6);
    // B = {1,3}: pairs (1,2) and (3,4)
    bool seen = false;
    for (const auto& t : f4.terms) {
        if (t.b_mask == 0b0101) {
            seen = true;
            REQUIRE(t.pairs.size() == 2);
            CHECK(t.pairs[0] == std::pair{1, 2});
            CHECK(t.pairs[1] == std::pair{3, 4});
        }
    }
    CHECK(seen);
    CHECK_THROWS_AS(fullrank_build(18), ResourceError);
    CHECK_THROWS_AS(fullrank_build(3), ResourceError);
}

TEST_CASE("specialization at omega = 1_Y gives exactly g_Y; omega = 0 gives zero") {
    Fp f(1009);
    auto fp = fullrank_build(4);
    // Y = {1,2}: g_Y = (x1+x3)(x2+x4)
    std::vector<Fp::elem> omega{1, 1, 0, 0};
    auto gy = fullrank_specialize(fp, f, omega);
    CHECK(gy.terms().size() == 4);
    CHECK(gy.coeff(0b0011) == 1); // x1 x2
    CHECK(gy.coeff(0b1100) == 1); // x3 x4
    CHECK(gy.coeff(0b0110) == 1); // x2 x3
    CHECK(gy.coeff(0b1001) == 1); // x1 x4
    CHECK(fullrank_specialize(fp, f, {0, 0, 0, 0}).is_zero());

    // indicator specialization under (Y, Z) is a permutation matrix
    auto pdm = build_pdm(gy, Partition(4, 0b0011));
    CHECK(is_permutation_matrix(pdm.matrix));
    CHECK(rank_yz(gy, Partition(4, 0b0011)) == 4);
}

TEST_CASE("hand-checked n = 2: both partitions have rank 2") {
    Fp f(1009);
    auto fp = fullrank_build(2);
    for (Mask y : {Mask{0b01}, Mask{0b10}}) {
        std::vector<Fp::elem> omega(2, 0);
        for (int i = 0; i < 2; ++i)
            if (y & (Mask{1} << i)) omega[i] = 1;
        CHECK(rank_yz(fullrank_specialize(fp, f, omega), Partition(2, y)) == 2);
    }
    // specializing omega = (1,1) gives 2 (x1 + x2)
    auto both = fullrank_specialize(fp, f, {1, 1});
    CHECK(both.coeff(0b01) == 2);
    CHECK(both.coeff(0b10) == 2);
}

TEST_CASE("indicator verification passes for n in {2, 4, 6}") {
    Fp f(1009);
    for (int n : {2, 4, 6}) {
        auto rep = fullrank_verify(fullrank_build(n), f, FullRankMethod::Indicator);
        CHECK(rep.partitions == binom_u64(n, n / 2));
        CHECK(rep.all_pass());
    }
}

TEST_CASE("random specialization over F_1009 finds full rank at n = 6") {
    Fp f(1009);
    auto rep = fullrank_verify(fullrank_build(6), f, FullRankMethod::Random, 17);
    // a random-method failure is not a disproof, but over a large field the
    // determinant vanishes rarely; demand a clean run for this seed
    CHECK(rep.all_pass());
}

TEST_CASE("random specialization at n = 8 succeeds on 99% of (seed, partition) trials") {
    // The determinant has degree 64 in the auxiliary variables, so a random
    // point over F_1009 may hit its zero set at a few percent per partition;
    // what holds (and what a vanishing-polynomial argument supports) is a
    // >= 99% success rate over individual trials, not over whole seeds.
    Fp f(1009);
    auto fp = fullrank_build(8);
    std::uint64_t trials = 0, failures = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto rep = fullrank_verify(fp, f, FullRankMethod::Random, seed);
        trials += rep.partitions;
        failures += rep.failures.size();
    }
    CHECK(trials == 7000);
    CHECK(failures * 100 <= trials); // >= 99% of trials at full rank
    // and the indicator route stays exact regardless
    CHECK(fullrank_verify(fp, f, FullRankMethod::Indicator).all_pass());
}

TEST_CASE("derivative ranks drop to exactly half, per the pdm property") {
    Fp f(1009);
    auto fp = fullrank_build(6);
    const std::uint64_t total = binom_u64(6, 3);
    for (std::uint64_t i = 0; i < total; ++i) {
        Mask y = colex_unrank(6, 3, i);
        std::vector<Fp::elem> omega(6, 0);
        for (int b = 0; b < 6; ++b)
            if (y & (Mask{1} << b)) omega[b] = 1;
        auto g = fullrank_specialize(fp, f, omega);
        REQUIRE(rank_yz(g, Partition(6, y)) == 8);
        for (int v = 1; v <= 6; ++v) CHECK(rank_yz(g.derivative(v), Partition(6, y)) == 4);
    }
}
