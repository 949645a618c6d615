#include "mlcirc/polymethod.hpp"

#include <algorithm>
#include <bit>

#include <gmpxx.h>

#include "mlcirc/field.hpp"
#include "mlcirc/rng.hpp"

namespace mlcirc {

namespace {

std::uint64_t stream_of(std::uint64_t op, std::uint64_t retry) { return (op << 32) | retry; }

std::vector<bool> membership(int n, const std::vector<std::uint32_t>& xs) {
    std::vector<bool> in(n, false);
    for (auto x : xs) in[x] = true;
    return in;
}

std::size_t count_in(const std::vector<std::uint32_t>& xs, const std::vector<bool>& in) {
    std::size_t c = 0;
    for (auto x : xs) c += in[x] ? 1 : 0;
    return c;
}

// a <= n^(num/den), exactly: a^den <= n^num
bool within_power_bound(long long a, long long n, int num, int den) {
    if (a <= 1) return true;
    mpz_class lhs, rhs;
    mpz_ui_pow_ui(lhs.get_mpz_t(), static_cast<unsigned long>(a), static_cast<unsigned long>(den));
    mpz_ui_pow_ui(rhs.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(num));
    return lhs <= rhs;
}

} // namespace

ReductionContext ReductionContext::trivial(int n, std::uint64_t p) {
    ReductionContext ctx;
    ctx.n = n;
    ctx.p = p;
    ctx.kept.resize(n);
    for (int i = 0; i < n; ++i) ctx.kept[i] = static_cast<std::uint32_t>(i);
    return ctx;
}

void ReductionContext::verify(const SetFamily& fam, int tau, const PolymethodConstants& c) const {
    if (fam.n != n) throw DomainError("reduction context universe mismatch");
    if (p != 0 && excluded.size() != static_cast<std::size_t>(n) - 4 * p)
        throw InvariantError("exclusion set size differs from n - 4p");
    if (!within_power_bound(static_cast<long long>(excluded.size()), n, c.a_exp_num, c.a_exp_den))
        throw InvariantError("exclusion set exceeds the n^0.6-style bound");
    if (pinned_half.size() != excluded.size() / 2)
        throw InvariantError("pinned half has wrong size");
    auto in_a = membership(n, excluded);
    for (auto b : pinned_half)
        if (!in_a[b]) throw InvariantError("pinned half not inside the exclusion set");
    if (excluded.size() + kept.size() != static_cast<std::size_t>(n))
        throw InvariantError("kept/excluded do not partition the universe");
    for (std::size_t i = 0; i < fam.sets.size(); ++i) {
        const auto& s = fam.sets[i];
        std::size_t inter = count_in(s, in_a);
        if (static_cast<long long>(s.size()) <= c.avoid_factor * tau && inter != 0)
            throw InvariantError("exclusion set meets a small set");
        if (static_cast<long long>(inter) * c.excl_den > static_cast<long long>(s.size()) * c.excl_num)
            throw InvariantError("exclusion bound violated on set " + std::to_string(i));
    }
}

std::uint64_t UnbalancePoly::eval_on_subset(const std::vector<std::uint32_t>& T) const {
    std::uint64_t acc = 1 % p;
    for (const auto& f : factors) {
        // sorted-merge intersection count
        std::size_t a = 0, b = 0, cnt = 0;
        while (a < f.support.size() && b < T.size()) {
            if (f.support[a] < T[b])
                ++a;
            else if (f.support[a] > T[b])
                ++b;
            else {
                ++cnt;
                ++a;
                ++b;
            }
        }
        for (int t = f.t_lo; t <= f.t_hi; ++t) {
            long long v = static_cast<long long>(cnt) + f.pinned - f.offset - t;
            long long r = v % static_cast<long long>(p);
            if (r < 0) r += static_cast<long long>(p);
            if (r == 0) return 0;
            acc = static_cast<std::uint64_t>((u128)acc * static_cast<std::uint64_t>(r) % p);
        }
    }
    return acc;
}

std::uint64_t UnbalancePoly::eval_on_mask(std::uint64_t t_mask) const {
    std::uint64_t acc = 1 % p;
    for (const auto& f : factors) {
        std::size_t cnt = std::popcount(t_mask & f.support_mask);
        for (int t = f.t_lo; t <= f.t_hi; ++t) {
            long long v = static_cast<long long>(cnt) + f.pinned - f.offset - t;
            long long r = v % static_cast<long long>(p);
            if (r < 0) r += static_cast<long long>(p);
            if (r == 0) return 0;
            acc = static_cast<std::uint64_t>((u128)acc * static_cast<std::uint64_t>(r) % p);
        }
    }
    return acc;
}

UnbalancePoly build_unbalance_poly(const SetFamily& fam, int tau, std::uint64_t p,
                                   const ReductionContext* ctx) {
    fam.check_wellformed();
    if (!is_prime_u64(p)) throw DomainError("unbalance polynomial needs a prime modulus");
    if (tau < 1) throw DomainError("tau >= 1 required");
    UnbalancePoly f;
    f.p = p;
    f.n = fam.n;
    std::vector<bool> in_a =
        ctx ? membership(fam.n, ctx->excluded) : std::vector<bool>(fam.n, false);

    for (std::size_t j = 0; j < fam.sets.size(); ++j) {
        const auto& s = fam.sets[j];
        if (2 * s.size() > static_cast<std::size_t>(fam.n))
            throw DomainError("set " + std::to_string(j) + " larger than n/2; complement it first");
        UnbalanceFactor fac;
        fac.set_size = static_cast<long long>(s.size());
        fac.offset = fac.set_size / 2;
        for (auto e : s) {
            if (!in_a[e]) fac.support.push_back(e);
        }
        if (ctx) fac.pinned = static_cast<long long>(count_in(s, membership(fam.n, ctx->pinned_half)));
        fac.t_lo = -tau + 1;
        fac.t_hi = (ctx && fac.set_size == 2 * tau) ? tau - 1 : tau;
        if (fac.t_lo > fac.t_hi) throw DomainError("empty t-range for set " + std::to_string(j));
        if (fac.support.empty()) {
            // degenerate constant factor; reject if any t makes it vanish
            for (int t = fac.t_lo; t <= fac.t_hi; ++t) {
                long long v = fac.pinned - fac.offset - t;
                if (((v % static_cast<long long>(p)) + static_cast<long long>(p)) % static_cast<long long>(p) == 0)
                    throw DomainError("factor for set " + std::to_string(j) + " is identically zero");
            }
        }
        if (fam.n <= 64) {
            for (auto e : fac.support) fac.support_mask |= std::uint64_t{1} << e;
        }
        f.factors.push_back(std::move(fac));
    }
    if (f.degree() > 2LL * tau * static_cast<long long>(fam.sets.size()))
        throw InvariantError("degree accounting violated");
    return f;
}

ConstructAResult construct_a(const SetFamily& fam, int tau, int a, std::uint64_t seed,
                             int max_retries, const PolymethodConstants& c) {
    fam.check_wellformed();
    if (tau < 1) throw DomainError("tau >= 1 required");
    if (a < 0) throw DomainError("negative target size");
    if (!within_power_bound(a, fam.n, c.a_exp_num, c.a_exp_den))
        throw DomainError("target size exceeds the configured n^(3/5)-style bound");

    ConstructAResult res;
    // L: union of all small sets; the sample pool avoids it outright
    std::vector<bool> in_l(fam.n, false);
    for (const auto& s : fam.sets)
        if (static_cast<long long>(s.size()) <= c.avoid_factor * tau)
            for (auto e : s) in_l[e] = true;
    std::vector<std::uint32_t> pool;
    for (int i = 0; i < fam.n; ++i)
        if (!in_l[i]) pool.push_back(static_cast<std::uint32_t>(i));
    if (pool.size() < static_cast<std::size_t>(a)) return res; // no retry can help

    for (int r = 0; r < max_retries; ++r) {
        ++res.retries_used;
        Rng rng(seed, stream_of(rng_stream::construct_a, static_cast<std::uint64_t>(r)));
        auto picks = rng.sample_without_replacement(static_cast<std::uint32_t>(pool.size()),
                                                    static_cast<std::uint32_t>(a));
        std::vector<std::uint32_t> A(picks.size());
        for (std::size_t i = 0; i < picks.size(); ++i) A[i] = pool[picks[i]];

        auto in_a = membership(fam.n, A);
        int violations = 0;
        for (const auto& s : fam.sets) {
            std::size_t inter = count_in(s, in_a);
            bool small = static_cast<long long>(s.size()) <= c.avoid_factor * tau;
            if ((small && inter != 0) ||
                static_cast<long long>(inter) * c.excl_den > static_cast<long long>(s.size()) * c.excl_num)
                ++violations;
        }
        if (violations > 0) {
            res.violations_per_retry.push_back(violations);
            continue;
        }
        ReductionContext ctx;
        ctx.n = fam.n;
        ctx.excluded = std::move(A);
        ctx.pinned_half.assign(ctx.excluded.begin(),
                               ctx.excluded.begin() + static_cast<long>(ctx.excluded.size() / 2));
        std::vector<bool> in_a2 = membership(fam.n, ctx.excluded);
        for (int i = 0; i < fam.n; ++i)
            if (!in_a2[i]) ctx.kept.push_back(static_cast<std::uint32_t>(i));
        ctx.verify(fam, tau, c);
        res.ctx = std::move(ctx);
        return res;
    }
    return res;
}

ConstructTResult construct_t(const SetFamily& fam, int tau, std::uint64_t p,
                             const ReductionContext& ctx, std::uint64_t seed,
                             const PolymethodConstants& c) {
    fam.check_wellformed();
    if (tau < 1) throw DomainError("tau >= 1 required");
    if (!is_prime_u64(p)) throw DomainError("construct_t needs a prime p");
    const int n = fam.n;
    if (ctx.n != n) throw DomainError("reduction context universe mismatch");
    for (const auto& s : fam.sets)
        if (2 * s.size() > static_cast<std::size_t>(n))
            throw DomainError("sets must have size <= n/2; complement larger sets first");

    const std::size_t target = static_cast<std::size_t>(3 * p);
    ConstructTResult res;
    auto in_a = membership(n, ctx.excluded);
    auto in_b = membership(n, ctx.pinned_half);

    std::vector<bool> in_t(n, false);
    std::size_t tsize = 0;
    auto add = [&](std::uint32_t e) {
        if (!in_t[e]) {
            in_t[e] = true;
            ++tsize;
            return true;
        }
        return false;
    };

    // stage 1: small sets join whole; a fixed grab from every other set;
    // pad with the smallest unused kept elements up to the cap
    for (const auto& s : fam.sets) {
        if (static_cast<long long>(s.size()) <= c.t1_small_factor * tau) {
            for (auto e : s)
                if (!in_a[e]) add(e);
        }
    }
    for (const auto& s : fam.sets) {
        if (static_cast<long long>(s.size()) > c.t1_small_factor * tau) {
            long long want = c.t1_grab_factor * tau;
            for (auto e : s) {
                if (want == 0) break;
                if (!in_a[e] && add(e)) --want;
            }
        }
    }
    const std::size_t cap =
        static_cast<std::size_t>((static_cast<long long>(n) * c.t1_cap_num) / c.t1_cap_den);
    for (auto e : ctx.kept) {
        if (tsize >= cap) break;
        add(e);
    }
    res.t1 = tsize;

    // stage 2: independent inclusion of the remaining kept elements
    Rng rng(seed, stream_of(rng_stream::construct_t, 0));
    for (auto e : ctx.kept) {
        if (in_t[e]) continue;
        if (rng.next_bernoulli(static_cast<std::uint64_t>(c.t2_num), static_cast<std::uint64_t>(c.t2_den)))
            add(e);
    }
    res.t2 = tsize - res.t1;

    // stage 3: refill sets that stayed under the threshold
    std::vector<std::uint32_t> t3_adds;
    for (const auto& s : fam.sets) {
        std::size_t cnt = 0;
        for (auto e : s) cnt += (in_t[e] || in_b[e]) ? 1 : 0;
        if (static_cast<long long>(cnt) * c.t3_den <= static_cast<long long>(c.t3_num) * static_cast<long long>(s.size())) {
            for (auto e : s)
                if (!in_a[e] && !in_t[e]) t3_adds.push_back(e);
        }
    }
    for (auto e : t3_adds) add(e);
    res.t3 = tsize - res.t1 - res.t2;

    res.t2_in_band = 100 * res.t2 >= static_cast<std::size_t>(c.t2_band_lo) * static_cast<std::size_t>(n) &&
                     100 * res.t2 <= static_cast<std::size_t>(c.t2_band_hi) * static_cast<std::size_t>(n);
    res.t3_small = 100 * res.t3 <= static_cast<std::size_t>(c.t3_cap) * static_cast<std::size_t>(n);

    if (tsize > target) {
        res.aborted = true;
        return res;
    }

    // stage 4: arbitrary padding, ascending
    for (auto e : ctx.kept) {
        if (tsize >= target) break;
        add(e);
    }
    res.t4 = tsize - res.t1 - res.t2 - res.t3;
    res.t4_small = 100 * res.t4 <= static_cast<std::size_t>(c.t4_cap) * static_cast<std::size_t>(n);
    if (tsize != target) {
        res.aborted = true; // kept universe too small to reach 3p
        return res;
    }

    for (int i = 0; i < n; ++i)
        if (in_t[i]) res.T.push_back(static_cast<std::uint32_t>(i));

    // exact postcondition: |(T u B) cap S_j| != floor(|S_j|/2) + t (mod p)
    for (std::size_t j = 0; j < fam.sets.size(); ++j) {
        const auto& s = fam.sets[j];
        long long cnt = 0;
        for (auto e : s) cnt += (in_t[e] || in_b[e]) ? 1 : 0;
        const long long off = static_cast<long long>(s.size()) / 2;
        const int t_hi = (static_cast<long long>(s.size()) == 2LL * tau) ? tau - 1 : tau;
        bool bad = false;
        for (int t = -tau + 1; t <= t_hi; ++t) {
            long long v = cnt - off - t;
            if (((v % static_cast<long long>(p)) + static_cast<long long>(p)) % static_cast<long long>(p) == 0) {
                bad = true;
                break;
            }
        }
        if (bad) res.violating_sets.push_back(j);
    }
    res.verified = res.violating_sets.empty();
    return res;
}

SpecialTResult sample_t_mu34(std::uint64_t p, std::uint64_t seed, std::uint64_t max_draws) {
    SpecialTResult res;
    const std::uint64_t n = 4 * p;
    for (std::uint64_t d = 0; d < max_draws; ++d) {
        Rng rng(seed, stream_of(rng_stream::special_t, d));
        std::vector<std::uint32_t> T;
        for (std::uint32_t e = 0; e < n; ++e)
            if (rng.next_bernoulli(3, 4)) T.push_back(e);
        ++res.draws;
        if (T.size() == 3 * p) {
            res.T = std::move(T);
            return res;
        }
    }
    return res;
}

WitnessReport witness_pipeline(const SetFamily& fam, int tau, WitnessMode mode, std::uint64_t seed,
                               const PolymethodConstants& c, int retries) {
    WitnessReport rep;
    rep.tau = tau;
    rep.m = fam.sets.size();
    fam.check_wellformed();

    // hypothesis window (reported, not fatal: the published windows are
    // empty at desk scale and the computation below is exact regardless)
    {
        WitnessStep step{"window", true, ""};
        std::uint64_t p_guess = mode == WitnessMode::Special ? static_cast<std::uint64_t>(fam.n) / 4 : 0;
        for (std::size_t j = 0; j < fam.sets.size(); ++j) {
            long long sz = static_cast<long long>(fam.sets[j].size());
            long long lo = mode == WitnessMode::Special ? 100LL * tau : 2LL * tau;
            long long hi = mode == WitnessMode::Special ? 4LL * static_cast<long long>(p_guess) - 100LL * tau
                                                        : static_cast<long long>(fam.n) - 2LL * tau;
            if (sz < lo || sz > hi) {
                step.ok = false;
                step.detail = "set " + std::to_string(j) + " outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]";
                break;
            }
        }
        rep.steps.push_back(step);
    }

    // complement sets larger than n/2 (d_Y is complement invariant)
    SetFamily work = fam;
    {
        int flipped = 0;
        for (auto& s : work.sets) {
            if (2 * s.size() > static_cast<std::size_t>(work.n)) {
                std::vector<bool> in = membership(work.n, s);
                std::vector<std::uint32_t> comp;
                for (int i = 0; i < work.n; ++i)
                    if (!in[i]) comp.push_back(static_cast<std::uint32_t>(i));
                s = std::move(comp);
                ++flipped;
            }
        }
        rep.steps.push_back({"complement-large-sets", true, std::to_string(flipped) + " set(s) complemented"});
    }

    // modulus and exclusion context
    ReductionContext ctx;
    if (mode == WitnessMode::Special) {
        WitnessStep step{"prime", false, ""};
        if (fam.n % 4 == 0 && is_prime_u64(static_cast<std::uint64_t>(fam.n) / 4)) {
            rep.p = static_cast<std::uint64_t>(fam.n) / 4;
            ctx = ReductionContext::trivial(fam.n, rep.p);
            step.ok = true;
            step.detail = "n = 4p with p = " + std::to_string(rep.p);
        } else {
            step.detail = "special mode needs n = 4p for prime p";
        }
        rep.steps.push_back(step);
        if (!step.ok) return rep;
    } else {
        WitnessStep step{"construct-A", false, ""};
        try {
            rep.p = largest_prime_4p_le(static_cast<std::uint64_t>(fam.n));
            int a = fam.n - static_cast<int>(4 * rep.p);
            if (a == 0) {
                ctx = ReductionContext::trivial(fam.n, rep.p);
                step.ok = true;
                step.detail = "p = " + std::to_string(rep.p) + ", empty exclusion set";
            } else {
                auto ar = construct_a(work, tau, a, seed, retries, c);
                if (ar.ctx) {
                    ctx = std::move(*ar.ctx);
                    ctx.p = rep.p;
                    step.ok = true;
                    step.detail = "p = " + std::to_string(rep.p) + ", |A| = " + std::to_string(a) +
                                  " after " + std::to_string(ar.retries_used) + " attempt(s)";
                } else {
                    step.detail = "no valid exclusion set in " + std::to_string(retries) + " attempt(s)";
                }
            }
        } catch (const DomainError& e) {
            step.detail = e.what();
        }
        rep.steps.push_back(step);
        if (!step.ok) return rep;
    }

    // the polynomial and its degree accounting
    UnbalancePoly f;
    {
        WitnessStep step{"build-poly", false, ""};
        try {
            f = build_unbalance_poly(work, tau, rep.p, &ctx);
            rep.degree = f.degree();
            rep.degree_bound = 2LL * tau * static_cast<long long>(work.sets.size());
            step.ok = rep.degree <= rep.degree_bound;
            step.detail = "deg f = " + std::to_string(rep.degree) + " <= 2 tau m = " +
                          std::to_string(rep.degree_bound) + ", p = " + std::to_string(rep.p);
        } catch (const DomainError& e) {
            step.detail = e.what();
        }
        rep.steps.push_back(step);
        if (!step.ok) return rep;
    }

    // hunt for T of size 3p with f(1_T) != 0
    {
        WitnessStep step{"find-T", false, ""};
        if (mode == WitnessMode::Special) {
            for (int r = 0; r < retries && !step.ok; ++r) {
                auto sr = sample_t_mu34(rep.p, seed + static_cast<std::uint64_t>(r), 4096);
                if (!sr.T) continue;
                if (f.eval_on_subset(*sr.T) != 0) {
                    rep.t_found = true;
                    rep.T = *sr.T;
                    step.ok = true;
                    step.detail = "mu_{3/4} sample accepted on attempt " + std::to_string(r + 1);
                }
            }
            if (!step.ok) step.detail = "no accepted sample had f(1_T) != 0";
        } else {
            int aborts = 0;
            for (int r = 0; r < retries && !step.ok; ++r) {
                auto tr = construct_t(work, tau, rep.p, ctx, seed + static_cast<std::uint64_t>(r), c);
                rep.t_stages = tr;
                if (tr.aborted) {
                    ++aborts;
                    continue;
                }
                if (tr.verified) {
                    if (f.eval_on_subset(tr.T) == 0)
                        throw InvariantError("verified T evaluates f to zero");
                    rep.t_found = true;
                    rep.T = tr.T;
                    step.ok = true;
                    step.detail = "attempt " + std::to_string(r + 1) + " verified (aborts so far: " +
                                  std::to_string(aborts) + ")";
                }
            }
            if (!step.ok)
                step.detail = "no verified T in " + std::to_string(retries) + " attempt(s), " +
                              std::to_string(aborts) + " abort(s)";
        }
        rep.steps.push_back(step);
    }

    // exhaustive cross-check at enumerable sizes: does a partition
    // unbalancing the whole family exist?
    if (fam.n <= 28 && fam.n % 2 == 0) {
        auto ur = find_unbalancing_partition(fam, tau, SearchMode::Exhaustive);
        if (ur.partition) rep.unbalancing_partition = ur.partition;
        rep.steps.push_back({"exhaustive-cross-check", true,
                             ur.partition ? "a partition unbalances every set (hypothesis fails)"
                                          : "every balanced partition balances some set"});
    }
    return rep;
}

} // namespace mlcirc
