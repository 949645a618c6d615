#include "mlcirc/setfam.hpp"

#include <algorithm>
#include <atomic>
#include <bit>

#include "mlcirc/field.hpp"

#include "mlcirc/rng.hpp"
#include "mlcirc/runtime.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mlcirc {

void SetFamily::check_wellformed() const {
    if (n < 2) throw DomainError("set family: universe too small");
    for (const auto& s : sets) {
        if (s.empty()) throw DomainError("set family: empty set");
        if (static_cast<int>(s.size()) >= n) throw DomainError("set family: set equals the universe");
        std::uint32_t prev = 0;
        bool first = true;
        for (std::uint32_t e : s) {
            if (e >= static_cast<std::uint32_t>(n)) throw DomainError("set family: element out of range");
            if (!first && e <= prev) throw DomainError("set family: elements not strictly increasing");
            prev = e;
            first = false;
        }
    }
}

bool SetFamily::within_window(int tau) const {
    for (const auto& s : sets) {
        int sz = static_cast<int>(s.size());
        if (sz < 2 * tau || sz > n - 2 * tau) return false;
    }
    return true;
}

std::uint64_t SetFamily::mask_of(std::size_t i) const {
    if (n > 64) throw ResourceError("set family: masks need n <= 64");
    std::uint64_t m = 0;
    for (std::uint32_t e : sets[i]) m |= std::uint64_t{1} << e;
    return m;
}

std::vector<std::uint64_t> SetFamily::masks() const {
    std::vector<std::uint64_t> out(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i) out[i] = mask_of(i);
    return out;
}

bool BalancedPartition::balanced() const {
    return n % 2 == 0 && std::popcount(y_mask) == n / 2;
}

int twice_imbalance(std::uint64_t y_mask, std::uint64_t s_mask) {
    int inter = std::popcount(y_mask & s_mask);
    int sz = std::popcount(s_mask);
    return std::abs(2 * inter - sz);
}

mpq_class imbalance(const BalancedPartition& y, std::uint64_t s_mask) {
    mpq_class q(twice_imbalance(y.y_mask, s_mask), 2);
    q.canonicalize();
    return q;
}

SetFamily galvin_interval_family(int g) {
    if (g < 1) throw DomainError("galvin_interval_family: g >= 1 required");
    SetFamily fam;
    fam.n = 4 * g;
    for (int i = 0; i < 2 * g + 1; ++i) {
        std::vector<std::uint32_t> s(2 * g);
        for (int k = 0; k < 2 * g; ++k) s[k] = static_cast<std::uint32_t>(i + k);
        fam.sets.push_back(std::move(s));
    }
    fam.check_wellformed();
    return fam;
}

SetFamily interval_tau_family(int n, int tau) {
    if (n < 4 || n % 2 != 0) throw DomainError("interval_tau_family: even n >= 4 required");
    if (tau < 1 || tau > n / 4) throw DomainError("interval_tau_family: need 1 <= tau <= n/4");
    SetFamily fam;
    fam.n = n;
    for (int start = 0; start <= (n / (2 * tau)) * tau; start += tau) {
        if (start + n / 2 > n) break; // starts never overrun, but keep the guard
        std::vector<std::uint32_t> s(n / 2);
        for (int k = 0; k < n / 2; ++k) s[k] = static_cast<std::uint32_t>(start + k);
        fam.sets.push_back(std::move(s));
    }
    fam.check_wellformed();
    return fam;
}

std::uint64_t binom_u64(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    u128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
        if (r > ~std::uint64_t{0}) throw ResourceError("binomial overflows 64 bits");
    }
    return static_cast<std::uint64_t>(r);
}

std::uint64_t next_same_popcount(std::uint64_t v) {
    std::uint64_t c = v & (~v + 1);
    std::uint64_t r = v + c;
    return (((r ^ v) >> 2) / c) | r;
}

std::uint64_t colex_unrank(int n, int k, std::uint64_t idx) {
    // combinatorial number system: pick the highest element first
    std::uint64_t mask = 0;
    int kk = k;
    for (int pos = n - 1; pos >= 0 && kk > 0; --pos) {
        std::uint64_t below = binom_u64(pos, kk);
        if (idx >= below) {
            mask |= std::uint64_t{1} << pos;
            idx -= below;
            --kk;
        }
    }
    if (kk != 0) throw DomainError("colex_unrank: index out of range");
    return mask;
}

namespace {

// Least colex-indexed balanced partition violating "some set is balanced",
// i.e. the least Y with d_Y(S_i) >= tau-threshold for every i. Parallel
// over contiguous colex ranges; the minimum over ranges is schedule
// independent. `checked` is the deterministic cutoff count: witness
// index + 1 on failure, the full partition count on success.
std::optional<std::uint64_t> least_uncovered_partition(const SetFamily& fam, int tau, bool strict,
                                                       std::uint64_t* checked) {
    if (fam.n > 28) throw ResourceError("exhaustive partition enumeration guarded at n <= 28");
    if (fam.n % 2 != 0) throw DomainError("balanced partitions need even n");
    const int n = fam.n;
    const int half = n / 2;
    const std::uint64_t total = binom_u64(n, half);
    const auto masks = fam.masks();
    const int m = static_cast<int>(masks.size());
    const int nthreads = std::max(1, thread_count());

    std::atomic<std::uint64_t> best{~std::uint64_t{0}};

    const std::uint64_t chunk = (total + nthreads - 1) / std::max<std::uint64_t>(1, nthreads);
#pragma omp parallel num_threads(nthreads)
    {
#ifdef _OPENMP
        const int t = omp_get_thread_num();
#else
        const int t = 0;
#endif
        const std::uint64_t lo = std::min<std::uint64_t>(total, t * chunk);
        const std::uint64_t hi = std::min<std::uint64_t>(total, lo + chunk);
        if (lo < hi && lo < best.load(std::memory_order_relaxed)) {
            std::uint64_t y = colex_unrank(n, half, lo);
            for (std::uint64_t idx = lo; idx < hi; ++idx) {
                if (idx >= best.load(std::memory_order_relaxed)) break;
                bool some_balanced = false;
                for (int i = 0; i < m; ++i) {
                    if (tau_balanced(y, masks[i], tau, strict)) {
                        some_balanced = true;
                        break;
                    }
                }
                if (!some_balanced) {
                    std::uint64_t cur = best.load(std::memory_order_relaxed);
                    while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
                    }
                    break;
                }
                y = next_same_popcount(y);
            }
        }
    }
    std::uint64_t b = best.load();
    if (checked) *checked = b == ~std::uint64_t{0} ? total : b + 1;
    if (b == ~std::uint64_t{0}) return std::nullopt;
    return colex_unrank(n, half, b);
}

} // namespace

CoverReport covers(const SetFamily& fam, int tau, bool strict) {
    fam.check_wellformed();
    if (tau < 0 || (strict && tau == 0)) throw DomainError("covers: tau-threshold is empty");
    CoverReport rep;
    auto w = least_uncovered_partition(fam, tau, strict, &rep.partitions_checked);
    rep.covers = !w.has_value();
    rep.witness_y = w;
    return rep;
}

CoverReport covers_serial(const SetFamily& fam, int tau, bool strict) {
    fam.check_wellformed();
    if (tau < 0 || (strict && tau == 0)) throw DomainError("covers: tau-threshold is empty");
    if (fam.n > 28) throw ResourceError("exhaustive partition enumeration guarded at n <= 28");
    if (fam.n % 2 != 0) throw DomainError("balanced partitions need even n");
    const auto masks = fam.masks();
    const std::uint64_t total = binom_u64(fam.n, fam.n / 2);
    CoverReport rep;
    std::uint64_t y = (std::uint64_t{1} << (fam.n / 2)) - 1;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        bool some_balanced = false;
        for (std::uint64_t s : masks)
            if (tau_balanced(y, s, tau, strict)) {
                some_balanced = true;
                break;
            }
        if (!some_balanced) {
            rep.covers = false;
            rep.witness_y = y;
            rep.partitions_checked = idx + 1;
            return rep;
        }
        if (idx + 1 < total) y = next_same_popcount(y);
    }
    rep.covers = true;
    rep.partitions_checked = total;
    return rep;
}

UnbalanceResult find_unbalancing_partition(const SetFamily& fam, int tau, SearchMode mode,
                                           std::uint64_t budget, std::uint64_t seed) {
    fam.check_wellformed();
    if (fam.n % 2 != 0) throw DomainError("balanced partitions need even n");
    if (tau < 1) throw DomainError("find_unbalancing_partition: tau >= 1");
    UnbalanceResult res;
    const auto masks = fam.masks();
    auto all_unbalanced = [&](std::uint64_t y) {
        for (std::uint64_t s : masks)
            if (twice_imbalance(y, s) < 2 * tau) return false;
        return true;
    };

    if (mode == SearchMode::Exhaustive) {
        // "every set tau-unbalanced" is exactly "no set strictly tau-balanced"
        auto w = least_uncovered_partition(fam, tau, /*strict=*/true, &res.tried);
        if (w) {
            if (!all_unbalanced(*w)) throw InvariantError("unbalancing witness failed re-verification");
            res.partition = BalancedPartition{fam.n, *w};
        }
        return res;
    }

    if (fam.n > 62) throw ResourceError("randomized partition sampling guarded at n <= 62");
    Rng rng(seed, rng_stream::partition_search);
    for (std::uint64_t it = 0; it < budget; ++it) {
        auto picks = rng.sample_without_replacement(static_cast<std::uint32_t>(fam.n),
                                                    static_cast<std::uint32_t>(fam.n / 2));
        std::uint64_t y = 0;
        for (auto e : picks) y |= std::uint64_t{1} << e;
        ++res.tried;
        if (all_unbalanced(y)) {
            res.partition = BalancedPartition{fam.n, y};
            return res;
        }
    }
    return res;
}

namespace {

struct CoverProblem {
    int n_elems = 0;                            // partition classes
    std::vector<std::vector<std::uint64_t>> cover; // per candidate: bitset words
    std::vector<std::uint64_t> cand_mask;       // candidate's set mask (window representative)
    int words = 0;
};

struct BnbState {
    const CoverProblem* prob;
    std::vector<std::vector<std::uint32_t>> covers_of_elem; // elem -> candidate indices
    std::vector<std::uint64_t> full;
    int best = -1;
    std::vector<std::uint32_t> best_pick, pick;
    std::uint64_t nodes = 0, node_budget = 0;

    bool complete(const std::vector<std::uint64_t>& acc) const {
        for (int w = 0; w < prob->words; ++w)
            if ((acc[w] & full[w]) != full[w]) return false;
        return true;
    }

    int first_uncovered_min_branch(const std::vector<std::uint64_t>& acc) const {
        int best_elem = -1;
        std::size_t best_count = ~std::size_t{0};
        for (int e = 0; e < prob->n_elems; ++e) {
            if (acc[e / 64] & (std::uint64_t{1} << (e % 64))) continue;
            std::size_t cnt = covers_of_elem[e].size();
            if (cnt < best_count) {
                best_count = cnt;
                best_elem = e;
            }
        }
        return best_elem;
    }

    void dfs(std::vector<std::uint64_t>& acc, int depth) {
        if (++nodes > node_budget) throw ResourceError("min_family_search exceeded its node budget");
        if (best >= 0 && depth >= best) return;
        if (complete(acc)) {
            best = depth;
            best_pick = pick;
            return;
        }
        if (best >= 0 && depth + 1 >= best) return;
        int e = first_uncovered_min_branch(acc);
        if (e < 0) return;
        for (std::uint32_t cand : covers_of_elem[e]) {
            pick.push_back(cand);
            std::vector<std::uint64_t> nxt(acc);
            for (int w = 0; w < prob->words; ++w) nxt[w] |= prob->cover[cand][w];
            dfs(nxt, depth + 1);
            pick.pop_back();
        }
    }
};

} // namespace

MinFamilyResult min_family_search(int n, int tau, int size_lo, int size_hi, bool exact_balance,
                                  bool strict, std::uint64_t node_budget) {
    if (n < 2 || n % 2 != 0 || n > 12) throw ResourceError("min_family_search guarded at even n <= 12");
    if (size_lo < 1 || size_hi >= n || size_lo > size_hi) throw DomainError("min_family_search: bad size window");
    if (!exact_balance && (tau < 0 || (strict && tau == 0)))
        throw DomainError("min_family_search: empty balance predicate");

    auto covered_by = [&](std::uint64_t y, std::uint64_t s) {
        if (exact_balance) return twice_imbalance(y, s) == 0;
        return tau_balanced(y, s, tau, strict);
    };

    // partition classes: balanced Y containing element 0 (Y and its
    // complement cover identically since d_Y = d_{[n]\Y})
    const int half = n / 2;
    std::vector<std::uint64_t> elems;
    {
        std::uint64_t rest = colex_unrank(n - 1, half - 1, 0);
        const std::uint64_t cnt = binom_u64(n - 1, half - 1);
        for (std::uint64_t i = 0; i < cnt; ++i) {
            elems.push_back((rest << 1) | 1);
            rest = i + 1 < cnt ? next_same_popcount(rest) : rest;
        }
    }

    // candidates: one representative per complement pair with the mask in
    // the size window (prefer the smaller mask when both qualify)
    const std::uint64_t fullm = (std::uint64_t{1} << n) - 1;
    std::vector<std::uint64_t> cands;
    for (std::uint64_t s = 1; s < fullm; ++s) {
        int sz = std::popcount(s);
        if (sz < size_lo || sz > size_hi) continue;
        std::uint64_t comp = fullm & ~s;
        int csz = n - sz;
        bool comp_ok = csz >= size_lo && csz <= size_hi;
        if (comp_ok && comp < s) continue; // the complement already stood in
        cands.push_back(s);
    }

    CoverProblem prob;
    prob.n_elems = static_cast<int>(elems.size());
    prob.words = (prob.n_elems + 63) / 64;
    prob.cand_mask = cands;
    prob.cover.assign(cands.size(), std::vector<std::uint64_t>(prob.words, 0));
    for (std::size_t ci = 0; ci < cands.size(); ++ci)
        for (int e = 0; e < prob.n_elems; ++e)
            if (covered_by(elems[e], cands[ci])) prob.cover[ci][e / 64] |= std::uint64_t{1} << (e % 64);

    MinFamilyResult out;
    // feasibility: the union of all candidates must cover everything
    {
        std::vector<std::uint64_t> acc(prob.words, 0);
        for (const auto& cv : prob.cover)
            for (int w = 0; w < prob.words; ++w) acc[w] |= cv[w];
        for (int e = 0; e < prob.n_elems; ++e) {
            if (!(acc[e / 64] & (std::uint64_t{1} << (e % 64)))) {
                out.feasible = false;
                out.uncoverable = elems[e];
                return out;
            }
        }
    }

    BnbState st;
    st.prob = &prob;
    st.node_budget = node_budget;
    st.full.assign(prob.words, 0);
    for (int e = 0; e < prob.n_elems; ++e) st.full[e / 64] |= std::uint64_t{1} << (e % 64);
    st.covers_of_elem.assign(prob.n_elems, {});
    for (std::size_t ci = 0; ci < cands.size(); ++ci)
        for (int e = 0; e < prob.n_elems; ++e)
            if (prob.cover[ci][e / 64] & (std::uint64_t{1} << (e % 64)))
                st.covers_of_elem[e].push_back(static_cast<std::uint32_t>(ci));

    std::vector<std::uint64_t> acc(prob.words, 0);
    st.dfs(acc, 0);

    out.feasible = true;
    out.m = st.best;
    out.nodes = st.nodes;
    out.witness.n = n;
    for (std::uint32_t ci : st.best_pick) {
        std::vector<std::uint32_t> s;
        for (int b = 0; b < n; ++b)
            if (prob.cand_mask[ci] & (std::uint64_t{1} << b)) s.push_back(static_cast<std::uint32_t>(b));
        out.witness.sets.push_back(std::move(s));
    }
    // a found minimum must actually cover; re-check against the raw predicate
    for (std::uint64_t y : elems) {
        bool ok = false;
        for (std::size_t i = 0; i < out.witness.sets.size() && !ok; ++i)
            ok = covered_by(y, out.witness.mask_of(i));
        if (!ok) throw InvariantError("min_family_search witness failed re-verification");
    }
    return out;
}

} // namespace mlcirc
