#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mlcirc/errors.hpp"
#include "mlcirc/field.hpp"
#include "mlcirc/matrix.hpp"

namespace mlcirc {

using Mask = std::uint64_t;

inline int popcount(Mask m) { return std::popcount(m); }

// Y-side of a partition of [n]; Z is the complement. |Y| = n/2 is not
// required (degenerate splits are allowed and used by the
// multiplicativity checks), but balanced() is queryable.
struct Partition {
    int n = 0;
    Mask y_mask = 0;

    Partition() = default;
    Partition(int n_, Mask y) : n(n_), y_mask(y) {
        if (n_ < 0 || n_ > 62) throw DomainError("partition: variable count out of range");
        if (y & ~full_mask()) throw DomainError("partition: Y not a subset of [n]");
    }

    Mask full_mask() const { return n == 0 ? 0 : (Mask{1} << n) - 1; }
    Mask z_mask() const { return full_mask() & ~y_mask; }
    int y_size() const { return popcount(y_mask); }
    int z_size() const { return n - y_size(); }
    bool balanced() const { return n % 2 == 0 && y_size() == n / 2; }
};

// Packs the bits of `m` that lie inside `sel` into a dense low-bit index,
// preserving order. This is the row/column indexing rule of the partial
// derivative matrix: increasing bitmask value within the compressed
// coordinates of Y (resp. Z).
inline std::uint64_t compress_bits(Mask m, Mask sel) {
    std::uint64_t out = 0;
    int bit = 0;
    while (sel) {
        Mask low = sel & (~sel + 1);
        if (m & low) out |= std::uint64_t{1} << bit;
        sel ^= low;
        ++bit;
    }
    return out;
}

// Sparse multilinear polynomial: monomial bitmask -> nonzero coefficient.
// Multilinearity is structural (a variable is either in a monomial or not).
template <class F>
class MultilinearPoly {
public:
    using elem = typename F::elem;
    using Terms = std::map<Mask, elem>;

    MultilinearPoly(F field, int n) : field_(field), n_(n) {
        if (n < 0 || n > 62) throw DomainError("polynomial: variable count out of range");
    }

    const F& field() const { return field_; }
    int n() const { return n_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    Mask full_mask() const { return n_ == 0 ? 0 : (Mask{1} << n_) - 1; }

    // coefficient += c, erasing the term if it cancels to zero
    void add_term(Mask mono, const elem& c) {
        if (mono & ~full_mask()) throw DomainError("monomial uses a variable outside [n]");
        if (field_.is_zero(c)) return;
        auto it = terms_.find(mono);
        if (it == terms_.end()) {
            terms_.emplace(mono, c);
        } else {
            it->second = field_.add(it->second, c);
            if (field_.is_zero(it->second)) terms_.erase(it);
        }
    }

    elem coeff(Mask mono) const {
        auto it = terms_.find(mono);
        return it == terms_.end() ? field_.zero() : it->second;
    }

    MultilinearPoly add(const MultilinearPoly& o) const {
        check_same(o);
        MultilinearPoly r = *this;
        for (const auto& [m, c] : o.terms_) r.add_term(m, c);
        return r;
    }

    MultilinearPoly neg() const {
        MultilinearPoly r(field_, n_);
        for (const auto& [m, c] : terms_) r.terms_.emplace(m, field_.neg(c));
        return r;
    }

    MultilinearPoly sub(const MultilinearPoly& o) const { return add(o.neg()); }

    MultilinearPoly scale(const elem& s) const {
        MultilinearPoly r(field_, n_);
        if (field_.is_zero(s)) return r;
        for (const auto& [m, c] : terms_) r.add_term(m, field_.mul(c, s));
        return r;
    }

    // Product of variable-disjoint polynomials (the only product the
    // multilinear representation can hold in general).
    MultilinearPoly mul_disjoint(const MultilinearPoly& o) const {
        check_same(o);
        if (support_mask() & o.support_mask())
            throw DomainError("mul_disjoint: operands share variables");
        MultilinearPoly r(field_, n_);
        for (const auto& [m1, c1] : terms_)
            for (const auto& [m2, c2] : o.terms_) r.add_term(m1 | m2, field_.mul(c1, c2));
        return r;
    }

    // Union of the variables that actually occur.
    Mask support_mask() const {
        Mask s = 0;
        for (const auto& [m, c] : terms_) s |= m;
        return s;
    }

    int degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, popcount(m));
        return d;
    }

    elem eval(const std::vector<elem>& point) const {
        if (static_cast<int>(point.size()) != n_)
            throw DomainError("eval: point length != variable count");
        elem acc = field_.zero();
        for (const auto& [m, c] : terms_) {
            elem t = c;
            Mask left = m;
            while (left) {
                int i = std::countr_zero(left);
                left &= left - 1;
                t = field_.mul(t, point[i]);
            }
            acc = field_.add(acc, t);
        }
        return acc;
    }

    // partial derivative with respect to variable i (1-based)
    MultilinearPoly derivative(int i) const {
        Mask bit = var_bit(i);
        MultilinearPoly r(field_, n_);
        for (const auto& [m, c] : terms_)
            if (m & bit) r.terms_.emplace(m & ~bit, c);
        return r;
    }

    // substitute x_i := value
    MultilinearPoly restrict_var(int i, const elem& value) const {
        Mask bit = var_bit(i);
        MultilinearPoly r(field_, n_);
        for (const auto& [m, c] : terms_) {
            if (m & bit)
                r.add_term(m & ~bit, field_.mul(c, value));
            else
                r.add_term(m, c);
        }
        return r;
    }

    bool operator==(const MultilinearPoly& o) const {
        return n_ == o.n_ && terms_ == o.terms_;
    }

private:
    Mask var_bit(int i) const {
        if (i < 1 || i > n_) throw DomainError("variable index out of range");
        return Mask{1} << (i - 1);
    }
    void check_same(const MultilinearPoly& o) const {
        if (n_ != o.n_) throw DomainError("polynomials over different variable counts");
    }

    F field_;
    int n_;
    Terms terms_;
};

// M_{Y,Z}(f): 2^|Y| x 2^|Z| matrix whose (m1, m2) entry is the coefficient
// of the monomial m1 * m2 in f.
template <class F>
struct PdMatrix {
    Partition partition;
    ExactMatrix<F> matrix;
};

template <class F>
PdMatrix<F> build_pdm(const MultilinearPoly<F>& f, const Partition& part) {
    if (part.n != f.n()) throw DomainError("build_pdm: partition/polynomial size mismatch");
    const int ys = part.y_size();
    const int zs = part.z_size();
    if (ys > 30 || zs > 30) throw ResourceError("build_pdm: side of partition too large to materialize");
    ExactMatrix<F> m(f.field(), std::size_t{1} << ys, std::size_t{1} << zs);
    for (const auto& [mono, c] : f.terms()) {
        std::uint64_t row = compress_bits(mono & part.y_mask, part.y_mask);
        std::uint64_t col = compress_bits(mono & part.z_mask(), part.z_mask());
        m.at(row, col) = c;
    }
    return PdMatrix<F>{part, std::move(m)};
}

template <class F>
std::size_t rank_yz(const MultilinearPoly<F>& f, const Partition& part) {
    return rank(build_pdm(f, part).matrix);
}

// Report of the five partial-derivative-matrix properties checked on a
// sample of polynomials: (1) trivial bound, (2) subadditivity,
// (3) multiplicativity on disjoint supports, (4) full rank forces
// derivative rank 2^(n/2-1), (5) low-degree bound.
struct PdmPropertyReport {
    struct Item {
        bool pass = true;
        long long checked = 0;
        std::string witness; // first failure, empty when pass
    };
    Item item[5];
    bool all_pass() const {
        for (const auto& it : item)
            if (!it.pass) return false;
        return true;
    }
};

template <class F>
PdmPropertyReport check_pdm_properties(const std::vector<MultilinearPoly<F>>& sample, const Partition& part) {
    PdmPropertyReport rep;
    auto fail = [](PdmPropertyReport::Item& it, const std::string& w) {
        if (it.pass) {
            it.pass = false;
            it.witness = w;
        }
    };

    std::vector<std::size_t> ranks;
    ranks.reserve(sample.size());
    for (const auto& f : sample) ranks.push_back(rank_yz(f, part));

    const std::size_t cap = std::size_t{1} << std::min(part.y_size(), part.z_size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        ++rep.item[0].checked;
        if (ranks[i] > cap) fail(rep.item[0], "rank " + std::to_string(ranks[i]) + " above trivial bound at sample " + std::to_string(i));
    }

    // (2) rank(f1+f2) <= rank(f1) + rank(f2) over consecutive pairs
    for (std::size_t i = 0; i + 1 < sample.size(); ++i) {
        std::size_t rs = rank_yz(sample[i].add(sample[i + 1]), part);
        ++rep.item[1].checked;
        if (rs > ranks[i] + ranks[i + 1])
            fail(rep.item[1], "subadditivity fails at samples " + std::to_string(i) + "," + std::to_string(i + 1));
    }

    // (3) on disjoint-support pairs rank multiplies. The factor ranks under
    // the partition induced on their own variables equal the ranks under
    // the full partition, because variables absent from a polynomial only
    // contribute all-zero rows and columns.
    for (std::size_t i = 0; i + 1 < sample.size(); ++i) {
        const auto& f1 = sample[i];
        Mask s1 = f1.support_mask();
        // restrict the partner to the complementary variables
        MultilinearPoly<F> f2(f1.field(), f1.n());
        for (const auto& [m, c] : sample[i + 1].terms())
            if ((m & s1) == 0) f2.add_term(m, c);
        if (f1.is_zero() || f2.is_zero()) continue;
        std::size_t r2 = rank_yz(f2, part);
        std::size_t rp = rank_yz(f1.mul_disjoint(f2), part);
        ++rep.item[2].checked;
        if (rp != ranks[i] * r2)
            fail(rep.item[2], "multiplicativity fails at samples " + std::to_string(i) + "," + std::to_string(i + 1));
    }

    // (4) full rank on a balanced partition forces every first derivative
    // to rank exactly 2^(n/2-1)
    if (part.balanced()) {
        const std::size_t full = std::size_t{1} << (part.n / 2);
        for (std::size_t i = 0; i < sample.size(); ++i) {
            if (ranks[i] != full) continue;
            for (int v = 1; v <= part.n; ++v) {
                auto d = sample[i].derivative(v);
                ++rep.item[3].checked;
                if (rank_yz(d, part) != full / 2)
                    fail(rep.item[3], "derivative rank wrong at sample " + std::to_string(i) + ", x" + std::to_string(v));
            }
        }
    }

    // (5) degree-d polynomial on a balanced partition: rank <= (n/2)^(d+1).
    // Needs n/2 >= 2: for a single-variable side the monomial count 2
    // already exceeds 1^(d+1).
    if (part.balanced() && part.n >= 4) {
        for (std::size_t i = 0; i < sample.size(); ++i) {
            unsigned long long bound = 1;
            bool overflow = false;
            for (int k = 0; k <= sample[i].degree(); ++k) {
                bound *= static_cast<unsigned long long>(part.n / 2);
                if (bound > (1ULL << 62)) {
                    overflow = true;
                    break;
                }
            }
            ++rep.item[4].checked;
            if (!overflow && ranks[i] > bound)
                fail(rep.item[4], "low-degree bound fails at sample " + std::to_string(i));
        }
    }
    return rep;
}

} // namespace mlcirc
