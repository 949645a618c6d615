#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mlcirc/errors.hpp"

namespace mlcirc {

// Subsets of [n] (elements stored 0-based, sorted). Universe sizes up to
// ~10^4 are used by the randomized constructions; the exhaustive engines
// additionally require n <= 28 so partitions fit an enumerable range.
struct SetFamily {
    int n = 0;
    std::vector<std::vector<std::uint32_t>> sets;

    void check_wellformed() const;

    // the non-triviality window 2*tau <= |S| <= n - 2*tau
    bool within_window(int tau) const;

    std::uint64_t mask_of(std::size_t i) const; // requires n <= 64
    std::vector<std::uint64_t> masks() const;
};

struct BalancedPartition {
    int n = 0;
    std::uint64_t y_mask = 0;

    bool balanced() const;
};

// Imbalance d_Y(S) = ||Y cap S| - |S|/2|, doubled so it stays an integer.
int twice_imbalance(std::uint64_t y_mask, std::uint64_t s_mask);
mpq_class imbalance(const BalancedPartition& y, std::uint64_t s_mask);

// d_Y(S) < tau (strict) or <= tau (non-strict), in doubled arithmetic.
inline bool tau_balanced(std::uint64_t y_mask, std::uint64_t s_mask, int tau, bool strict) {
    int d2 = twice_imbalance(y_mask, s_mask);
    return strict ? d2 < 2 * tau : d2 <= 2 * tau;
}

// --- explicit constructions ----------------------------------------------

// The 2g+1 intervals {i, ..., i+2g-1} of size 2g over [4g]: every
// size-2g subset exactly balances one of them.
SetFamily galvin_interval_family(int g);

// Intervals of length n/2 starting at 1, 1+tau, ..., 1+floor(n/(2tau))*tau.
// Size <= n/(2tau) + 1, and every balanced partition is tau-balanced on
// some member.
SetFamily interval_tau_family(int n, int tau);

// --- exhaustive and randomized engines ------------------------------------

struct CoverReport {
    bool covers = false;
    std::optional<std::uint64_t> witness_y; // colex-least partition unbalancing all sets
    std::uint64_t partitions_checked = 0;
};

// Does every balanced partition tau-balance some set? Exhaustive over all
// C(n, n/2) partitions (guard n <= 28); parallel over colex ranges with a
// colex-least witness, so the result is thread-count invariant.
CoverReport covers(const SetFamily& fam, int tau, bool strict);

// Single straight-line sweep, the reference the parallel engine is tested
// and benchmarked against.
CoverReport covers_serial(const SetFamily& fam, int tau, bool strict);

enum class SearchMode { Exhaustive, Randomized };

struct UnbalanceResult {
    std::optional<BalancedPartition> partition;
    std::uint64_t tried = 0;
};

// A balanced partition with d_Y(S_i) >= tau for every i, or not-found.
// Every returned witness is re-verified before returning.
UnbalanceResult find_unbalancing_partition(const SetFamily& fam, int tau, SearchMode mode,
                                           std::uint64_t budget = 0, std::uint64_t seed = 0);

struct MinFamilyResult {
    bool feasible = false;                    // false: even all candidates fail
    int m = -1;                               // minimal family size when feasible
    SetFamily witness;                        // one minimal covering family
    std::optional<std::uint64_t> uncoverable; // partition no candidate covers
    std::uint64_t nodes = 0;                  // branch-and-bound nodes visited
};

// Smallest m for which a covering family of sets with sizes in
// [size_lo, size_hi] exists. exact_balance demands |Y cap S| = |S|/2;
// otherwise coverage is d_Y(S) < tau (strict) or <= tau. Exhaustive
// branch-and-bound over complement-deduplicated candidates; n <= 12.
MinFamilyResult min_family_search(int n, int tau, int size_lo, int size_hi, bool exact_balance,
                                  bool strict = true, std::uint64_t node_budget = 200'000'000ULL);

// --- exact probability calculators ----------------------------------------

// Pr[|S cap T| = i] for fixed |S| = M inside [N] and uniformly random T of
// size k: C(M, i) C(N-M, k-i) / C(N, k), computed exactly.
mpq_class hypergeom_pmf(unsigned M, unsigned N, unsigned k, unsigned i);

// Tail bound e^(-2 t^2 k) on Pr[||S cap T| - kM/N| >= t k]. A bound for
// reporting, not an exact quantity.
double hypergeom_tail_bound(unsigned M, unsigned N, unsigned k, double t);

// Pr[|T cap S| = g] for |S| = 2g and |T| = 2g over [4g]:
// C(2g, g)^2 / C(4g, 2g).
mpq_class galvin_middle_probability(unsigned g);

// --- enumeration utilities -------------------------------------------------

// Binomial coefficient C(n, k) as uint64 (n <= 64 within range).
std::uint64_t binom_u64(int n, int k);

// Next mask with the same popcount in increasing numeric (= colex) order.
std::uint64_t next_same_popcount(std::uint64_t v);

// The idx-th (0-based) k-subset mask of [n] in colex order.
std::uint64_t colex_unrank(int n, int k, std::uint64_t idx);

} // namespace mlcirc
