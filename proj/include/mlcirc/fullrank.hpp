#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlcirc/poly.hpp"
#include "mlcirc/rng.hpp"
#include "mlcirc/runtime.hpp"
#include "mlcirc/setfam.hpp"

namespace mlcirc {

// The explicit polynomial sum_B r_B g_B over all balanced B: r_B is the
// product of the auxiliary variables indexed by B, and g_B pairs the l-th
// smallest element of B with the l-th smallest of its complement,
// g_B = prod (x_{i_l} + x_{j_l}). Stored structurally; rank statements
// over the rational-function field in the auxiliary variables are
// certified by specialization, never by symbolic arithmetic.
struct FullRankPoly {
    int n = 0;
    struct Term {
        Mask b_mask;                             // r_B as an omega-subset
        std::vector<std::pair<int, int>> pairs; // (i_l, j_l), 1-based
    };
    std::vector<Term> terms; // B in colex order, C(n, n/2) of them
};

inline FullRankPoly fullrank_build(int n) {
    if (n < 2 || n % 2 != 0 || n > 16) throw ResourceError("fullrank_build guarded at even n in [2, 16]");
    FullRankPoly fp;
    fp.n = n;
    const std::uint64_t total = binom_u64(n, n / 2);
    Mask b = (Mask{1} << (n / 2)) - 1;
    for (std::uint64_t i = 0; i < total; ++i) {
        FullRankPoly::Term t;
        t.b_mask = b;
        std::vector<int> in, out;
        for (int v = 1; v <= n; ++v) {
            if (b & (Mask{1} << (v - 1)))
                in.push_back(v);
            else
                out.push_back(v);
        }
        for (std::size_t l = 0; l < in.size(); ++l) t.pairs.emplace_back(in[l], out[l]);
        fp.terms.push_back(std::move(t));
        if (i + 1 < total) b = next_same_popcount(b);
    }
    return fp;
}

// Substitutes numeric values for the auxiliary variables; the result is an
// honest multilinear polynomial in x over the field.
template <class F>
MultilinearPoly<F> fullrank_specialize(const FullRankPoly& fp, const F& fld,
                                       const std::vector<typename F::elem>& omega) {
    if (static_cast<int>(omega.size()) != fp.n) throw DomainError("omega length != n");
    MultilinearPoly<F> out(fld, fp.n);
    for (const auto& t : fp.terms) {
        typename F::elem rb = fld.one();
        Mask left = t.b_mask;
        while (left) {
            int i = std::countr_zero(left);
            left &= left - 1;
            rb = fld.mul(rb, omega[i]);
        }
        if (fld.is_zero(rb)) continue;
        // expand prod (x_i + x_j) into its 2^(n/2) monomials
        MultilinearPoly<F> gb(fld, fp.n);
        gb.add_term(0, fld.one());
        for (const auto& [i, j] : t.pairs) {
            MultilinearPoly<F> bin(fld, fp.n);
            bin.add_term(Mask{1} << (i - 1), fld.one());
            bin.add_term(Mask{1} << (j - 1), fld.one());
            gb = gb.mul_disjoint(bin);
        }
        for (const auto& [m, c] : gb.terms()) out.add_term(m, fld.mul(c, rb));
    }
    return out;
}

// True iff the matrix has exactly one nonzero entry in every row and every
// column (which certifies rank 2^(n/2) without elimination).
template <class F>
bool is_permutation_matrix(const ExactMatrix<F>& m) {
    if (m.rows() != m.cols()) return false;
    std::vector<bool> col_seen(m.cols(), false);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        int nonzero = 0;
        std::size_t where = 0;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (!m.field().is_zero(m.at(r, c))) {
                ++nonzero;
                where = c;
            }
        }
        if (nonzero != 1 || col_seen[where]) return false;
        col_seen[where] = true;
    }
    return true;
}

enum class FullRankMethod { Indicator, Random };

struct FullRankReport {
    int n = 0;
    FullRankMethod method = FullRankMethod::Indicator;
    std::uint64_t partitions = 0;
    std::uint64_t passed = 0;
    std::vector<Mask> failures; // y-masks; random-method failures are not disproofs
    bool all_pass() const { return passed == partitions; }
};

// Per-partition certification of full rank, embarrassingly parallel over
// the C(n, n/2) partitions. Indicator: specialize the auxiliary variables
// to 1 on Y, check M_{Y,Z} is a permutation matrix and its rank is exactly
// 2^(n/2). Random: one random specialization per partition; a failure only
// means the sampled point hit the determinant's zero set, and is listed,
// not treated as a disproof.
template <class F>
FullRankReport fullrank_verify(const FullRankPoly& fp, const F& fld, FullRankMethod method,
                               std::uint64_t seed = 0) {
    if (fp.n > 12) throw ResourceError("fullrank_verify loops all partitions; guarded at n <= 12");
    FullRankReport rep;
    rep.n = fp.n;
    rep.method = method;
    const int n = fp.n;
    const std::uint64_t total = binom_u64(n, n / 2);
    rep.partitions = total;
    const std::size_t want_rank = std::size_t{1} << (n / 2);
    std::vector<char> ok(total, 0);

#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count())
    for (long long idx = 0; idx < static_cast<long long>(total); ++idx) {
        Mask y = colex_unrank(n, n / 2, static_cast<std::uint64_t>(idx));
        Partition part(n, y);
        std::vector<typename F::elem> omega;
        omega.reserve(n);
        if (method == FullRankMethod::Indicator) {
            for (int i = 0; i < n; ++i)
                omega.push_back((y >> i) & 1 ? fld.one() : fld.zero());
        } else {
            Rng rng(seed, (std::uint64_t{rng_stream::random_omega} << 32) | static_cast<std::uint64_t>(idx));
            for (int i = 0; i < n; ++i)
                omega.push_back(fld.from_int(static_cast<long long>(rng.next_below(std::uint64_t{1} << 20))));
        }
        auto f = fullrank_specialize(fp, fld, omega);
        auto pdm = build_pdm(f, part);
        bool pass = rank(pdm.matrix) == want_rank;
        if (method == FullRankMethod::Indicator) pass = pass && is_permutation_matrix(pdm.matrix);
        ok[static_cast<std::size_t>(idx)] = pass ? 1 : 0;
    }
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        if (ok[idx])
            ++rep.passed;
        else
            rep.failures.push_back(colex_unrank(n, n / 2, idx));
    }
    return rep;
}

} // namespace mlcirc
