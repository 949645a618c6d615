#include <doctest.h>

#include "mlcirc/field.hpp"

using namespace mlcirc;

TEST_CASE("miller-rabin on small and structured inputs") {
    CHECK(is_prime_u64(2));
    CHECK(is_prime_u64(3));
    CHECK(is_prime_u64(101));
    CHECK(is_prime_u64(1009));
    CHECK_FALSE(is_prime_u64(1));
    CHECK_FALSE(is_prime_u64(0));
    CHECK_FALSE(is_prime_u64(561));   // Carmichael
    CHECK_FALSE(is_prime_u64(341));   // 2-pseudoprime
    CHECK(is_prime_u64(2147483647)); // 2^31 - 1
    CHECK_FALSE(is_prime_u64((std::uint64_t{1} << 61) - 2));
    CHECK(is_prime_u64((std::uint64_t{1} << 61) - 1));
}

TEST_CASE("largest prime with 4p <= n") {
    CHECK(largest_prime_4p_le(8) == 2);
    CHECK(largest_prime_4p_le(12) == 3);
    // sieve to 25: largest prime below is 23
    CHECK(largest_prime_4p_le(100) == 23);
    CHECK_THROWS_AS(largest_prime_4p_le(7), DomainError);
}

TEST_CASE("F_p arithmetic closes and inverts") {
    Fp f(101);
    CHECK(f.add(100, 2) == 1);
    CHECK(f.sub(1, 2) == 100);
    CHECK(f.mul(51, 2) == 1);
    CHECK(f.mul(f.inv(37), 37) == 1);
    CHECK(f.from_int(-1) == 100);
    CHECK(f.from_string("-102") == 100);
    CHECK_THROWS_AS(Fp(100), DomainError);
    CHECK_THROWS_AS(f.inv(0), DomainError);
}

TEST_CASE("rational arithmetic is exact and canonical") {
    Rat r;
    auto a = r.from_string("2/4");
    CHECK(r.to_string(a) == "1/2");
    CHECK(r.to_string(r.add(a, a)) == "1");
    CHECK(r.to_string(r.mul(r.from_int(3), r.inv(r.from_int(7)))) == "3/7");
    CHECK_THROWS_AS(r.from_string("x"), DomainError);
}

TEST_CASE("field spec round trip") {
    auto s1 = FieldSpec::make_prime(101);
    auto s2 = FieldSpec::make_rational();
    CHECK(s1 != s2);
    CHECK_THROWS_AS(FieldSpec::make_prime(6), DomainError);
    int visited = 0;
    with_field(s1, [&](auto fld) {
        if constexpr (!std::decay_t<decltype(fld)>::is_rational) visited += static_cast<int>(fld.modulus());
    });
    CHECK(visited == 101);
}
