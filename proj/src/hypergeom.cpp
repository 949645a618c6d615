#include <cmath>

#include "mlcirc/setfam.hpp"

namespace mlcirc {

namespace {

mpz_class binom_mpz(unsigned n, unsigned k) {
    mpz_class r;
    if (k > n) return r; // 0
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

} // namespace

mpq_class hypergeom_pmf(unsigned M, unsigned N, unsigned k, unsigned i) {
    if (M > N || k > N || i > k) throw DomainError("hypergeom_pmf: need i <= k <= N and M <= N");
    mpz_class num = binom_mpz(M, i) * binom_mpz(N - M, k - i);
    mpz_class den = binom_mpz(N, k);
    if (den == 0) throw DomainError("hypergeom_pmf: empty sample space");
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

double hypergeom_tail_bound(unsigned M, unsigned N, unsigned k, double t) {
    if (M > N || k > N) throw DomainError("hypergeom_tail_bound: need k <= N and M <= N");
    return std::exp(-2.0 * t * t * static_cast<double>(k));
}

mpq_class galvin_middle_probability(unsigned g) {
    if (g == 0) throw DomainError("galvin_middle_probability: g >= 1");
    mpz_class half = binom_mpz(2 * g, g);
    mpq_class q(half * half, binom_mpz(4 * g, 2 * g));
    q.canonicalize();
    return q;
}

} // namespace mlcirc
