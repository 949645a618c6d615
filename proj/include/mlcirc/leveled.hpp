#pragma once

#include <set>
#include <string>
#include <vector>

#include "mlcirc/circuit.hpp"
#include "mlcirc/poly.hpp"
#include "mlcirc/setfam.hpp"

namespace mlcirc {

// Leveled-gate split at threshold k: lower gates have support strictly
// between k and n-k and a parent of support at least n-k; upper gates are
// those parents. Fan-in 2 gives |lower| <= 2 |upper|.
struct LeveledSets {
    int k = 0;
    std::vector<long long> lower; // gate ids, ascending
    std::vector<long long> upper;
};

template <class F>
LeveledSets leveled_sets(const Circuit<F>& c, int k) {
    c.ensure_valid();
    if (k < 0 || 2 * k >= c.n()) throw DomainError("leveled_sets: need 0 <= k < n/2");
    auto xs = var_sets(c);
    const int n = c.n();
    std::set<long long> lower, upper;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& g = c.gates()[i];
        if (g.op != GateOp::Add && g.op != GateOp::Mul) continue;
        if (popcount(xs[i]) < n - k) continue;
        for (std::size_t ch : {c.left_index(i), c.right_index(i)}) {
            int sz = popcount(xs[ch]);
            if (sz > k && sz < n - k) {
                lower.insert(c.gates()[ch].id);
                upper.insert(g.id);
            }
        }
    }
    LeveledSets ls;
    ls.k = k;
    ls.lower.assign(lower.begin(), lower.end());
    ls.upper.assign(upper.begin(), upper.end());
    if (ls.lower.size() > 2 * ls.upper.size())
        throw InvariantError("|lower| <= 2 |upper| violated");
    return ls;
}

// f = sum_j g_j h_j + g with variable-disjoint pairs; h_j is the polynomial
// of the j-th lower gate, g is what remains after every lower gate is
// replaced by zero. The degree of g against the configured threshold is a
// report field, not an invariant: the source states O(log n) in one place
// and 200 tau in another.
template <class F>
struct Decomposition {
    std::vector<std::pair<MultilinearPoly<F>, MultilinearPoly<F>>> pairs; // (g_j, h_j)
    MultilinearPoly<F> residual;
    std::vector<long long> lower_ids; // v_j per pair
    std::vector<Mask> lower_varsets;  // X_{v_j} per pair
    int tau = 0;
    int residual_degree = 0;
    bool residual_degree_ok = true; // deg residual <= 200 tau
};

namespace detail {

// expand with lower gates v_1..v_{j-1} forced to zero and v_j replaced by a
// placeholder variable (bit n); returns the pair (coefficient of the
// placeholder, remainder at placeholder = 0)
template <class F>
std::pair<MultilinearPoly<F>, MultilinearPoly<F>> split_at_gate(const Circuit<F>& c,
                                                                const std::vector<long long>& zeroed,
                                                                long long placeholder_gate) {
    const F& fld = c.field();
    Circuit<F> mod(fld, c.n() + 1);
    for (auto g : c.gates()) {
        bool zero_it = false;
        for (long long z : zeroed) zero_it = zero_it || z == g.id;
        if (zero_it) {
            Gate<F> repl;
            repl.id = g.id;
            repl.op = GateOp::Const;
            repl.value = fld.zero();
            mod.push(repl);
        } else if (g.id == placeholder_gate) {
            Gate<F> repl;
            repl.id = g.id;
            repl.op = GateOp::Var;
            repl.var = c.n() + 1;
            mod.push(repl);
        } else {
            mod.push(g);
        }
    }
    mod.add_output(c.outputs()[0]);
    auto expanded = expand(mod, c.outputs()[0]);

    MultilinearPoly<F> coef(fld, c.n());
    MultilinearPoly<F> rest(fld, c.n());
    const Mask zbit = Mask{1} << c.n();
    for (const auto& [m, cf] : expanded.terms()) {
        if (m & zbit)
            coef.add_term(m & ~zbit, cf);
        else
            rest.add_term(m, cf);
    }
    return {coef, rest};
}

} // namespace detail

// Iterated gate substitution in topological order: the j-th step splits
// the current polynomial linearly in a placeholder at v_j (earlier lower
// gates already zeroed, later ones still expanded through), which makes
// the telescoped identity hold on DAGs where lower gates multiply each
// other. The identity and per-pair disjointness are verified by full
// expansion before returning.
template <class F>
Decomposition<F> decompose(const Circuit<F>& c, int k, int tau) {
    c.ensure_valid();
    if (c.outputs().size() != 1) throw DomainError("decompose needs a single-output circuit");
    if (c.n() > 20) throw ResourceError("decompose guarded at n <= 20");
    {
        auto [ok, bad] = is_syntactically_multilinear(c);
        if (!ok)
            throw DomainError("decompose input is not syntactically multilinear (gate " +
                              std::to_string(*bad) + ")");
    }
    const F& fld = c.field();
    auto ls = leveled_sets(c, k);
    auto xs = var_sets(c);

    // Lower gates processed top-down (reverse topological order): when the
    // placeholder lands at v_j, every already-zeroed gate is an ancestor or
    // incomparable, so the polynomial flowing out of v_j is still the
    // original h_j. Bottom-up order would zero descendants of v_j first and
    // silently change h_j.
    std::vector<long long> order;
    for (std::size_t i : c.topo_order()) {
        long long id = c.gates()[i].id;
        for (long long v : ls.lower)
            if (v == id) order.push_back(id);
    }
    std::reverse(order.begin(), order.end());

    Decomposition<F> dec{{}, MultilinearPoly<F>(fld, c.n()), {}, {}, tau, 0, true};
    std::vector<long long> zeroed;
    for (long long vj : order) {
        auto h = expand(c, vj);
        auto [gj, rest] = detail::split_at_gate(c, zeroed, vj);
        dec.pairs.emplace_back(gj, h);
        dec.lower_ids.push_back(vj);
        dec.lower_varsets.push_back(xs[c.index_of(vj)]);
        zeroed.push_back(vj);
        (void)rest; // the residual is re-derived once at the end
    }
    // residual: every lower gate zeroed
    {
        Circuit<F> mod(fld, c.n());
        for (auto g : c.gates()) {
            bool zero_it = false;
            for (long long z : zeroed) zero_it = zero_it || z == g.id;
            if (zero_it) {
                Gate<F> repl;
                repl.id = g.id;
                repl.op = GateOp::Const;
                repl.value = fld.zero();
                mod.push(repl);
            } else {
                mod.push(g);
            }
        }
        mod.add_output(c.outputs()[0]);
        dec.residual = expand(mod, c.outputs()[0]);
    }
    dec.residual_degree = dec.residual.degree();
    dec.residual_degree_ok = dec.residual_degree <= 200 * tau;

    // verified identity: f = sum g_j h_j + g, with per-pair disjoint supports
    auto f = expand(c, c.outputs()[0]);
    MultilinearPoly<F> acc = dec.residual;
    for (std::size_t j = 0; j < dec.pairs.size(); ++j) {
        const auto& [gj, hj] = dec.pairs[j];
        if (gj.support_mask() & hj.support_mask())
            throw InvariantError("pair " + std::to_string(j) + " shares variables");
        if (gj.support_mask() & dec.lower_varsets[j])
            throw InvariantError("pair " + std::to_string(j) + ": g_j meets X_{v_j}");
        acc = acc.add(gj.mul_disjoint(hj));
    }
    if (!(acc == f)) throw InvariantError("decomposition identity failed");
    return dec;
}

// Rank-collapse report under one balanced partition: per-pair exact bound
// 2^(min(|Y cap S_h|,|Z cap S_h|) + min(|Y cap S_g|,|Z cap S_g|)), the
// tau-unbalancedness of each X_{v_j}, the residual low-degree bound, and
// the total ell * 2^(n/2 - tau) + (n/2)^(deg g + 1) against the actual
// rank of f. Both sides are evaluated and reported, never asserted.
struct RankCollapseReport {
    struct Pair {
        long long gate_id;
        std::size_t actual_rank;
        std::uint64_t bound;
        bool bound_holds;
        bool tau_unbalanced; // d_Y(X_{v_j}) >= tau
    };
    std::vector<Pair> pairs;
    std::size_t residual_rank = 0;
    std::uint64_t residual_bound = 0;
    int residual_degree = 0;
    std::uint64_t total_bound = 0;
    std::size_t actual_rank = 0;
    bool collapse_bound_holds = false; // actual <= total (reported)
};

template <class F>
RankCollapseReport rank_collapse_check(const Circuit<F>& c, int tau, int k, const Partition& part) {
    if (!part.balanced()) throw DomainError("rank_collapse_check needs a balanced partition");
    auto dec = decompose(c, k, tau);
    const int n = c.n();
    RankCollapseReport rep;
    auto side_min = [&](Mask support) {
        int y = popcount(support & part.y_mask);
        int z = popcount(support & part.z_mask());
        return std::min(y, z);
    };
    for (std::size_t j = 0; j < dec.pairs.size(); ++j) {
        const auto& [gj, hj] = dec.pairs[j];
        RankCollapseReport::Pair pr;
        pr.gate_id = dec.lower_ids[j];
        auto prod = gj.mul_disjoint(hj);
        pr.actual_rank = rank_yz(prod, part);
        pr.bound = std::uint64_t{1} << (side_min(gj.support_mask()) + side_min(hj.support_mask()));
        pr.bound_holds = pr.actual_rank <= pr.bound;
        pr.tau_unbalanced = twice_imbalance(part.y_mask, dec.lower_varsets[j]) >= 2 * tau;
        rep.pairs.push_back(pr);
    }
    rep.residual_degree = dec.residual_degree;
    rep.residual_rank = rank_yz(dec.residual, part);
    {
        // (n/2)^(deg g + 1), saturating at 2^(n/2)
        std::uint64_t cap = std::uint64_t{1} << (n / 2);
        std::uint64_t b = 1;
        for (int i = 0; i <= dec.residual_degree && b < cap; ++i) b *= static_cast<std::uint64_t>(n / 2);
        rep.residual_bound = std::min(b, cap);
    }
    rep.actual_rank = rank_yz(expand(c, c.outputs()[0]), part);
    {
        std::uint64_t per_pair = tau <= n / 2 ? (std::uint64_t{1} << (n / 2 - tau)) : 1;
        rep.total_bound = dec.pairs.size() * per_pair + rep.residual_bound;
    }
    rep.collapse_bound_holds = rep.actual_rank <= rep.total_bound;
    return rep;
}

} // namespace mlcirc
