#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlcirc/setfam.hpp"

namespace mlcirc {

// Every tuning constant of the randomized constructions in one record.
// paper() is the published parameter set; those thresholds only bite at
// astronomically large n, so desk() scales the greedy stages down to sizes
// where runs at p in {5, 7} exercise every code path. The exact
// postcondition verifiers are identical for both presets.
struct PolymethodConstants {
    // exclusion-set construction: sets of size <= avoid_factor * tau must
    // not meet the excluded set; |A cap S| <= excl_num/excl_den * |S|
    long long avoid_factor = 10'000;
    int excl_num = 1, excl_den = 100;
    // target size bound a <= n^(a_exp_num/a_exp_den)
    int a_exp_num = 3, a_exp_den = 5;

    // T construction: sets <= t1_small_factor * tau enter T1 whole; from
    // every other set grab t1_grab_factor * tau elements; pad T1 up to
    // (t1_cap_num/t1_cap_den) n
    long long t1_small_factor = 6'000;
    long long t1_grab_factor = 6'000;
    int t1_cap_num = 6, t1_cap_den = 100;
    // independent inclusion probability for T2
    int t2_num = 65, t2_den = 100;
    // refill threshold: sets with |S cap (T1 u T2 u B)| <= (t3_num/t3_den)|S|
    int t3_num = 52, t3_den = 100;
    // reported (never asserted) tail events
    int t2_band_lo = 64, t2_band_hi = 66; // 0.64 n <= |T2| <= 0.66 n
    int t3_cap = 1;                       // |T3| <= 0.01 n
    int t4_cap = 5;                       // |T4| <= 0.05 n

    static PolymethodConstants paper() { return {}; }
    static PolymethodConstants desk() {
        PolymethodConstants c;
        c.avoid_factor = 4;
        c.t1_small_factor = 2;
        c.t1_grab_factor = 2;
        return c;
    }
};

// Exclusion context for reducing a universe of even size n to 4p: A is the
// excluded set of size n - 4p, B an arbitrary half of A pinned to the Y
// side, and kept = [n] \ A carries the bijection to [4p] in ascending
// order.
struct ReductionContext {
    int n = 0;
    std::uint64_t p = 0; // (n - |excluded|) / 4 when the caller fixed it
    std::vector<std::uint32_t> excluded;    // A, sorted
    std::vector<std::uint32_t> pinned_half; // B, sorted, |B| = |A|/2
    std::vector<std::uint32_t> kept;        // [n] \ A, sorted

    static ReductionContext trivial(int n, std::uint64_t p);

    // exact exclusion invariants of the construction
    void verify(const SetFamily& fam, int tau, const PolymethodConstants& c) const;
};

// One factor Prod_t (<x, 1_{S_j \ A}> + |S_j cap B| - floor(|S_j|/2) - t)
// of the unbalance polynomial, evaluable at indicator vectors without
// expansion.
struct UnbalanceFactor {
    std::vector<std::uint32_t> support; // S_j \ A, sorted (original labels)
    std::uint64_t support_mask = 0;     // valid when n <= 64
    long long set_size = 0;             // |S_j|
    long long offset = 0;               // floor(|S_j|/2)
    long long pinned = 0;               // |S_j cap B|
    int t_lo = 0, t_hi = 0;             // inclusive range of t
};

struct UnbalancePoly {
    std::uint64_t p = 0;
    int n = 0;
    std::vector<UnbalanceFactor> factors;

    long long degree() const {
        long long d = 0;
        for (const auto& f : factors) d += f.t_hi - f.t_lo + 1;
        return d;
    }

    // value at the indicator vector of T (T given as a sorted subset of
    // the kept universe, original labels), factor by factor mod p
    std::uint64_t eval_on_subset(const std::vector<std::uint32_t>& T) const;
    std::uint64_t eval_on_mask(std::uint64_t t_mask) const; // n <= 64
};

// f = Prod_j B_j over F_p. Requires every |S_j| <= n/2 (complement larger
// sets first). With a reduction context the t-range shrinks by one at both
// ends' worth for |S_j| = 2 tau exactly, per the construction.
UnbalancePoly build_unbalance_poly(const SetFamily& fam, int tau, std::uint64_t p,
                                   const ReductionContext* ctx);

// --- randomized constructors (exact postconditions, seeded) ---------------

struct ConstructAResult {
    std::optional<ReductionContext> ctx;
    std::uint64_t retries_used = 0;
    std::vector<int> violations_per_retry; // count of violated sets per failed try
};

// Random subset A of [n] \ L of size a, where L is the union of all sets of
// size <= avoid_factor * tau; accepted only when every exclusion bound
// re-verifies exactly.
ConstructAResult construct_a(const SetFamily& fam, int tau, int a, std::uint64_t seed,
                             int max_retries, const PolymethodConstants& c = PolymethodConstants::paper());

struct ConstructTResult {
    bool aborted = false;  // |T1|+|T2|+|T3| > 3p
    bool verified = false; // exact mod-p postcondition on every set
    std::vector<std::uint32_t> T;
    std::size_t t1 = 0, t2 = 0, t3 = 0, t4 = 0; // stage sizes
    bool t2_in_band = false, t3_small = false, t4_small = false;
    std::vector<std::size_t> violating_sets; // nonempty when !verified && !aborted
};

// The staged greedy/random/refill/pad construction of a 3p-subset of
// [n] \ A unbalancing every set mod p. One seeded attempt.
ConstructTResult construct_t(const SetFamily& fam, int tau, std::uint64_t p,
                             const ReductionContext& ctx, std::uint64_t seed,
                             const PolymethodConstants& c = PolymethodConstants::paper());

// mu_{3/4} sampler conditioned on |T| = 3p by rejection: the special-case
// path. Returns the accepted T and the number of draws spent.
struct SpecialTResult {
    std::optional<std::vector<std::uint32_t>> T;
    std::uint64_t draws = 0;
};
SpecialTResult sample_t_mu34(std::uint64_t p, std::uint64_t seed, std::uint64_t max_draws);

// --- Hegedus lemma verification --------------------------------------------

struct HegedusReport {
    std::uint64_t p = 0;
    bool pass = false;
    std::size_t rows = 0, cols = 0; // evaluation matrix dimensions
    std::size_t rank = 0, nullity = 0;
    // counterexample: a degree < p polynomial vanishing on the middle layer
    // but not on some weight-3p point
    std::optional<std::uint64_t> violating_point;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> violating_poly; // (monomial mask, coefficient)
};

// Checks, by exact nullspace containment over F_p, that every polynomial of
// degree < p in 4p variables vanishing on all weight-2p points of {0,1}^4p
// also vanishes on all weight-3p points. p in {2, 3} runs the materialized
// evaluation matrix; p = 5 runs a saturating elimination with on-the-fly
// rows behind allow_heavy.
HegedusReport hegedus_verify(std::uint64_t p, bool allow_heavy = false);

// --- end-to-end pipeline ----------------------------------------------------

enum class WitnessMode { Special, General };

struct WitnessStep {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct WitnessReport {
    std::vector<WitnessStep> steps;
    std::uint64_t p = 0;
    int tau = 0;
    std::size_t m = 0;
    long long degree = 0;       // deg(f)
    long long degree_bound = 0; // 2 tau m
    bool t_found = false;
    std::vector<std::uint32_t> T;
    std::optional<ConstructTResult> t_stages;
    // exhaustive cross-check when n <= 28: a partition unbalancing every
    // set, when one exists
    std::optional<BalancedPartition> unbalancing_partition;
    bool all_ok() const {
        for (const auto& s : steps)
            if (!s.ok) return false;
        return true;
    }
};

// Runs the proof pipeline as computation: window validation, complementing
// large sets, (general) prime selection and A/B construction, building
// f = Prod B_j, hunting for T with f(1_T) != 0, and the degree accounting
// deg(f) <= 2 tau m vs p. Never asserts the theorems' conclusions.
WitnessReport witness_pipeline(const SetFamily& fam, int tau, WitnessMode mode, std::uint64_t seed,
                               const PolymethodConstants& c = PolymethodConstants::paper(),
                               int retries = 32);

} // namespace mlcirc
