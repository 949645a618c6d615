#include "mlcirc/matrix.hpp"

#include <algorithm>

#include "mlcirc/runtime.hpp"

namespace mlcirc {

namespace {

// Extracts the submatrix of rows/columns that contain a nonzero entry.
template <class F>
std::vector<std::vector<typename F::elem>> compact_nonzero(const ExactMatrix<F>& m) {
    const F& fld = m.field();
    std::vector<bool> col_live(m.cols(), false), row_live(m.rows(), false);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (!fld.is_zero(m.at(r, c))) {
                col_live[c] = true;
                row_live[r] = true;
            }
        }
    }
    std::vector<std::size_t> live_cols;
    for (std::size_t c = 0; c < m.cols(); ++c)
        if (col_live[c]) live_cols.push_back(c);
    std::vector<std::vector<typename F::elem>> rows;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (!row_live[r]) continue;
        std::vector<typename F::elem> row;
        row.reserve(live_cols.size());
        for (std::size_t c : live_cols) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::size_t rank_fp_rows(const Fp& fld, std::vector<std::vector<std::uint64_t>>& a, bool parallel) {
    const std::size_t nrows = a.size();
    const std::size_t ncols = nrows ? a[0].size() : 0;
    std::size_t r = 0;
    for (std::size_t c = 0; c < ncols && r < nrows; ++c) {
        std::size_t piv = r;
        while (piv < nrows && a[piv][c] == 0) ++piv;
        if (piv == nrows) continue;
        std::swap(a[piv], a[r]);
        const std::uint64_t inv = fld.inv(a[r][c]);
        const auto& prow = a[r];
        const long long lo = static_cast<long long>(r) + 1;
        const long long hi = static_cast<long long>(nrows);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (parallel && hi - lo > 64)
        for (long long i = lo; i < hi; ++i) {
            auto& row = a[static_cast<std::size_t>(i)];
            if (row[c] == 0) continue;
            const std::uint64_t f = fld.mul(row[c], inv);
            for (std::size_t j = c; j < ncols; ++j) row[j] = fld.sub(row[j], fld.mul(f, prow[j]));
        }
        ++r;
    }
    return r;
}

// GF(2): rows packed 64 columns per word.
std::size_t rank_f2_rows(const std::vector<std::vector<std::uint64_t>>& dense, bool parallel) {
    const std::size_t nrows = dense.size();
    const std::size_t ncols = nrows ? dense[0].size() : 0;
    const std::size_t words = (ncols + 63) / 64;
    std::vector<std::vector<std::uint64_t>> a(nrows, std::vector<std::uint64_t>(words, 0));
    for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t c = 0; c < ncols; ++c)
            if (dense[r][c] & 1) a[r][c / 64] |= 1ULL << (c % 64);

    std::size_t r = 0;
    for (std::size_t c = 0; c < ncols && r < nrows; ++c) {
        const std::size_t w = c / 64;
        const std::uint64_t bit = 1ULL << (c % 64);
        std::size_t piv = r;
        while (piv < nrows && !(a[piv][w] & bit)) ++piv;
        if (piv == nrows) continue;
        std::swap(a[piv], a[r]);
        const auto& prow = a[r];
        const long long lo = static_cast<long long>(r) + 1;
        const long long hi = static_cast<long long>(nrows);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (parallel && hi - lo > 256)
        for (long long i = lo; i < hi; ++i) {
            auto& row = a[static_cast<std::size_t>(i)];
            if (!(row[w] & bit)) continue;
            for (std::size_t j = w; j < words; ++j) row[j] ^= prow[j];
        }
        ++r;
    }
    return r;
}

// Fraction-free (Bareiss) elimination; every division is exact, entries are
// minors of the original integer matrix.
std::size_t rank_bareiss(std::vector<std::vector<mpz_class>>& a) {
    const std::size_t nrows = a.size();
    const std::size_t ncols = nrows ? a[0].size() : 0;
    mpz_class prev = 1;
    std::size_t r = 0;
    for (std::size_t c = 0; c < ncols && r < nrows; ++c) {
        std::size_t piv = r;
        while (piv < nrows && a[piv][c] == 0) ++piv;
        if (piv == nrows) continue;
        std::swap(a[piv], a[r]);
        for (std::size_t i = r + 1; i < nrows; ++i) {
            for (std::size_t j = c + 1; j < ncols; ++j) {
                mpz_class num = a[r][c] * a[i][j] - a[i][c] * a[r][j];
                mpz_divexact(a[i][j].get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
            }
            a[i][c] = 0;
        }
        prev = a[r][c];
        ++r;
    }
    return r;
}

std::vector<std::vector<mpz_class>> clear_denominators(const ExactMatrix<Rat>& m) {
    std::vector<std::vector<mpz_class>> a;
    a.reserve(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        mpz_class l = 1;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            mpz_class den = m.at(r, c).get_den();
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), den.get_mpz_t());
        }
        std::vector<mpz_class> row;
        row.reserve(m.cols());
        for (std::size_t c = 0; c < m.cols(); ++c) {
            const mpq_class& q = m.at(r, c);
            row.push_back(mpz_class(q.get_num() * (l / q.get_den())));
        }
        a.push_back(std::move(row));
    }
    return a;
}

} // namespace

std::size_t rank(const ExactMatrix<Fp>& m) {
    auto rows = compact_nonzero(m);
    if (rows.empty()) return 0;
    if (m.field().modulus() == 2) return rank_f2_rows(rows, true);
    return rank_fp_rows(m.field(), rows, true);
}

std::size_t rank_serial(const ExactMatrix<Fp>& m) {
    auto rows = compact_nonzero(m);
    if (rows.empty()) return 0;
    if (m.field().modulus() == 2) return rank_f2_rows(rows, false);
    return rank_fp_rows(m.field(), rows, false);
}

std::size_t rank(const ExactMatrix<Rat>& m) {
    auto a = clear_denominators(m);
    // drop all-zero rows cheaply; Bareiss handles zero columns by skipping
    a.erase(std::remove_if(a.begin(), a.end(),
                           [](const std::vector<mpz_class>& row) {
                               return std::all_of(row.begin(), row.end(), [](const mpz_class& v) { return v == 0; });
                           }),
            a.end());
    return rank_bareiss(a);
}

std::size_t rank_serial(const ExactMatrix<Rat>& m) {
    // plain rational Gauss elimination, the naive reference
    std::vector<std::vector<mpq_class>> a;
    a.reserve(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::vector<mpq_class> row;
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
        a.push_back(std::move(row));
    }
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < a.size(); ++c) {
        std::size_t piv = r;
        while (piv < a.size() && a[piv][c] == 0) ++piv;
        if (piv == a.size()) continue;
        std::swap(a[piv], a[r]);
        for (std::size_t i = r + 1; i < a.size(); ++i) {
            if (a[i][c] == 0) continue;
            mpq_class f = a[i][c] / a[r][c];
            for (std::size_t j = c; j < m.cols(); ++j) a[i][j] -= f * a[r][j];
        }
        ++r;
    }
    return r;
}

std::vector<std::vector<Fp::elem>> nullspace_basis(const ExactMatrix<Fp>& m) {
    const Fp fld = m.field();
    const std::size_t nrows = m.rows();
    const std::size_t ncols = m.cols();
    std::vector<std::vector<std::uint64_t>> a(nrows, std::vector<std::uint64_t>(ncols, 0));
    for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t c = 0; c < ncols; ++c) a[r][c] = m.at(r, c);

    // Gauss-Jordan to the (unique) RREF.
    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < ncols && r < nrows; ++c) {
        std::size_t piv = r;
        while (piv < nrows && a[piv][c] == 0) ++piv;
        if (piv == nrows) continue;
        std::swap(a[piv], a[r]);
        const std::uint64_t inv = fld.inv(a[r][c]);
        for (std::size_t j = c; j < ncols; ++j) a[r][j] = fld.mul(a[r][j], inv);
        const auto& prow = a[r];
        const long long hi = static_cast<long long>(nrows);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (hi > 256)
        for (long long i = 0; i < hi; ++i) {
            if (static_cast<std::size_t>(i) == r) continue;
            auto& row = a[static_cast<std::size_t>(i)];
            if (row[c] == 0) continue;
            const std::uint64_t f = row[c];
            for (std::size_t j = c; j < ncols; ++j) row[j] = fld.sub(row[j], fld.mul(f, prow[j]));
        }
        pivot_col.push_back(c);
        ++r;
    }

    std::vector<bool> is_pivot(ncols, false);
    for (std::size_t c : pivot_col) is_pivot[c] = true;

    std::vector<std::vector<Fp::elem>> basis;
    for (std::size_t free_c = 0; free_c < ncols; ++free_c) {
        if (is_pivot[free_c]) continue;
        std::vector<Fp::elem> v(ncols, 0);
        v[free_c] = fld.one();
        for (std::size_t i = 0; i < pivot_col.size(); ++i) v[pivot_col[i]] = fld.neg(a[i][free_c]);
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace mlcirc
