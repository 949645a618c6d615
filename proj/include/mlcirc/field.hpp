#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "mlcirc/errors.hpp"

namespace mlcirc {

#if !defined(__SIZEOF_INT128__)
#error "mlcirc requires unsigned __int128 (GCC/Clang)"
#endif
using u128 = unsigned __int128;

// Deterministic Miller-Rabin, valid for every n < 2^64.
bool is_prime_u64(std::uint64_t n);

// All primes <= limit, by sieve of Eratosthenes.
std::vector<std::uint64_t> primes_up_to(std::uint64_t limit);

// The largest prime p with 4p <= n. Requires even n >= 8.
std::uint64_t largest_prime_4p_le(std::uint64_t n);

// Arithmetic over F_p. Elements are canonical residues in [0, p).
class Fp {
public:
    using elem = std::uint64_t;

    explicit Fp(std::uint64_t p) : p_(p) {
        if (!is_prime_u64(p)) throw DomainError("modulus " + std::to_string(p) + " is not prime");
    }

    std::uint64_t modulus() const { return p_; }
    static constexpr bool is_rational = false;

    elem zero() const { return 0; }
    elem one() const { return 1 % p_; }
    bool is_zero(elem a) const { return a == 0; }

    elem add(elem a, elem b) const {
        elem r = a + b;
        if (r >= p_ || r < a) r -= p_;
        return r;
    }
    elem sub(elem a, elem b) const { return a >= b ? a - b : a + (p_ - b); }
    elem neg(elem a) const { return a == 0 ? 0 : p_ - a; }
    elem mul(elem a, elem b) const { return static_cast<elem>((u128)a * b % p_); }

    elem pow(elem a, std::uint64_t e) const {
        elem r = one(), base = a;
        while (e) {
            if (e & 1) r = mul(r, base);
            base = mul(base, base);
            e >>= 1;
        }
        return r;
    }
    elem inv(elem a) const {
        if (a == 0) throw DomainError("division by zero in F_p");
        return pow(a, p_ - 2);
    }

    elem from_int(long long v) const {
        long long r = v % static_cast<long long>(p_);
        if (r < 0) r += static_cast<long long>(p_);
        return static_cast<elem>(r);
    }
    elem from_mpz(const mpz_class& v) const {
        mpz_class m = v % mpz_class(static_cast<unsigned long>(p_));
        if (m < 0) m += static_cast<unsigned long>(p_);
        return m.get_ui();
    }
    elem from_string(const std::string& s) const { return from_mpz(mpz_class(s, 10)); }

    std::string to_string(elem a) const { return std::to_string(a); }
    bool eq(elem a, elem b) const { return a == b; }

private:
    std::uint64_t p_;
};

// Exact rational arithmetic. GMP keeps values canonical (lowest terms,
// positive denominator).
class Rat {
public:
    using elem = mpq_class;

    static constexpr bool is_rational = true;

    elem zero() const { return mpq_class(0); }
    elem one() const { return mpq_class(1); }
    bool is_zero(const elem& a) const { return a == 0; }

    elem add(const elem& a, const elem& b) const { return a + b; }
    elem sub(const elem& a, const elem& b) const { return a - b; }
    elem neg(const elem& a) const { return -a; }
    elem mul(const elem& a, const elem& b) const { return a * b; }
    elem inv(const elem& a) const {
        if (a == 0) throw DomainError("division by zero in Q");
        return 1 / a;
    }

    elem from_int(long long v) const { return mpq_class(static_cast<long>(v)); }
    elem from_string(const std::string& s) const {
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw DomainError("bad rational literal: " + s);
        q.canonicalize();
        return q;
    }

    std::string to_string(const elem& a) const { return a.get_str(); }
    bool eq(const elem& a, const elem& b) const { return a == b; }
};

// Runtime tag for "which field is this file/computation over".
struct FieldSpec {
    bool rational = false;
    std::uint64_t p = 0; // valid when !rational

    static FieldSpec make_prime(std::uint64_t p) {
        if (!is_prime_u64(p)) throw DomainError("modulus " + std::to_string(p) + " is not prime");
        return FieldSpec{false, p};
    }
    static FieldSpec make_rational() { return FieldSpec{true, 0}; }

    bool operator==(const FieldSpec&) const = default;
};

// Instantiates fn with the concrete field for a runtime spec.
template <class Fn>
decltype(auto) with_field(const FieldSpec& spec, Fn&& fn) {
    if (spec.rational) return std::forward<Fn>(fn)(Rat{});
    return std::forward<Fn>(fn)(Fp{spec.p});
}

} // namespace mlcirc
