#pragma once

// Test-side oracles, written independently of the library paths they check.

#include <cstdint>
#include <map>
#include <vector>

#include "mlcirc/circuit.hpp"
#include "mlcirc/poly.hpp"
#include "mlcirc/rng.hpp"

namespace oracle {

using mlcirc::Mask;

// Plain textbook row reduction over F_p, no pivot tricks, no compaction.
inline std::size_t rank_fp(std::vector<std::vector<std::uint64_t>> a, std::uint64_t p) {
    std::size_t rows = a.size();
    std::size_t cols = rows ? a[0].size() : 0;
    auto powmod = [&](std::uint64_t b, std::uint64_t e) {
        std::uint64_t r = 1;
        while (e) {
            if (e & 1) r = (unsigned __int128)r * b % p;
            b = (unsigned __int128)b * b % p;
            e >>= 1;
        }
        return r;
    };
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv][c] % p == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[r]);
        std::uint64_t inv = powmod(a[r][c] % p, p - 2);
        for (std::size_t i = r + 1; i < rows; ++i) {
            std::uint64_t f = (unsigned __int128)(a[i][c] % p) * inv % p;
            for (std::size_t j = 0; j < cols; ++j)
                a[i][j] = (a[i][j] % p + p - (unsigned __int128)f * (a[r][j] % p) % p) % p;
        }
        ++r;
    }
    return r;
}

// Coefficient matrix of f under (Y, Z) built by direct monomial
// enumeration over all 2^|Y| x 2^|Z| cells (independent of the scatter
// construction in the library).
template <class F>
std::vector<std::vector<std::uint64_t>> pdm_by_enumeration(const mlcirc::MultilinearPoly<F>& f,
                                                           const mlcirc::Partition& part) {
    std::vector<int> ybits, zbits;
    for (int i = 0; i < part.n; ++i) {
        if (part.y_mask & (Mask{1} << i))
            ybits.push_back(i);
        else
            zbits.push_back(i);
    }
    std::vector<std::vector<std::uint64_t>> m(std::size_t{1} << ybits.size(),
                                              std::vector<std::uint64_t>(std::size_t{1} << zbits.size(), 0));
    for (std::size_t ry = 0; ry < m.size(); ++ry) {
        Mask my = 0;
        for (std::size_t b = 0; b < ybits.size(); ++b)
            if (ry & (std::size_t{1} << b)) my |= Mask{1} << ybits[b];
        for (std::size_t cz = 0; cz < m[ry].size(); ++cz) {
            Mask mz = 0;
            for (std::size_t b = 0; b < zbits.size(); ++b)
                if (cz & (std::size_t{1} << b)) mz |= Mask{1} << zbits[b];
            m[ry][cz] = f.coeff(my | mz);
        }
    }
    return m;
}

// f|_{x_i = 1} - f|_{x_i = 0}, the restriction-difference derivative.
template <class F>
mlcirc::MultilinearPoly<F> derivative_by_restriction(const mlcirc::MultilinearPoly<F>& f, int i) {
    const auto one = f.field().one();
    const auto zero = f.field().zero();
    return f.restrict_var(i, one).sub(f.restrict_var(i, zero));
}

// Variables reachable by reverse DFS from a gate, independent of var_sets.
template <class F>
Mask reachable_vars(const mlcirc::Circuit<F>& c, long long gate_id) {
    c.ensure_valid();
    std::vector<std::size_t> stack{c.index_of(gate_id)};
    std::vector<bool> seen(c.size(), false);
    Mask out = 0;
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        if (seen[i]) continue;
        seen[i] = true;
        const auto& g = c.gates()[i];
        if (g.op == mlcirc::GateOp::Var) out |= Mask{1} << (g.var - 1);
        if (g.op == mlcirc::GateOp::Add || g.op == mlcirc::GateOp::Mul) {
            stack.push_back(c.left_index(i));
            stack.push_back(c.right_index(i));
        }
    }
    return out;
}

// Seeded random sparse multilinear polynomial.
template <class F>
mlcirc::MultilinearPoly<F> random_poly(const F& fld, int n, int terms, std::uint64_t seed) {
    mlcirc::Rng rng(seed, 77);
    mlcirc::MultilinearPoly<F> f(fld, n);
    for (int t = 0; t < terms; ++t) {
        Mask m = rng.next_u64() & ((Mask{1} << n) - 1);
        long long c = static_cast<long long>(rng.next_below(19)) - 9;
        f.add_term(m, fld.from_int(c));
    }
    return f;
}

// Seeded random syntactically multilinear circuit with one output.
// Product gates only combine candidates with disjoint variable sets.
template <class F>
mlcirc::Circuit<F> random_multilinear_circuit(const F& fld, int n, int internal, std::uint64_t seed) {
    mlcirc::Rng rng(seed, 78);
    mlcirc::Circuit<F> c(fld, n);
    std::vector<long long> pool;
    std::vector<Mask> varset;
    for (int i = 1; i <= n; ++i) {
        pool.push_back(c.add_var(i));
        varset.push_back(Mask{1} << (i - 1));
    }
    pool.push_back(c.add_const(fld.from_int(static_cast<long long>(rng.next_below(7)) + 1)));
    varset.push_back(0);

    for (int g = 0; g < internal; ++g) {
        std::size_t a = rng.next_below(pool.size());
        bool want_mul = rng.next_below(2) == 0;
        long long made = -1;
        Mask mv = 0;
        if (want_mul) {
            // find a disjoint partner; fall back to add
            std::size_t tries = 8;
            while (tries--) {
                std::size_t b = rng.next_below(pool.size());
                if ((varset[a] & varset[b]) == 0) {
                    made = c.add_mul(pool[a], pool[b]);
                    mv = varset[a] | varset[b];
                    break;
                }
            }
        }
        if (made < 0) {
            std::size_t b = rng.next_below(pool.size());
            made = c.add_add(pool[a], pool[b]);
            mv = varset[a] | varset[b];
        }
        pool.push_back(made);
        varset.push_back(mv);
    }
    c.add_output(pool.back());
    return c;
}

} // namespace oracle
