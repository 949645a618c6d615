#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mlcirc/errors.hpp"
#include "mlcirc/field.hpp"

namespace mlcirc {

// Dense row-major matrix over an exact field. Values are immutable from the
// caller's point of view; rank/nullspace work on internal copies.
template <class F>
class ExactMatrix {
public:
    using elem = typename F::elem;

    ExactMatrix(F field, std::size_t rows, std::size_t cols)
        : field_(field), rows_(rows), cols_(cols), a_(rows * cols, field.zero()) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const F& field() const { return field_; }

    elem& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const elem& at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    ExactMatrix transpose() const {
        ExactMatrix t(field_, cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
        return t;
    }

    bool operator==(const ExactMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }

private:
    F field_;
    std::size_t rows_, cols_;
    std::vector<elem> a_;
};

// Exact rank. F_p uses pivoted row echelon (GF(2) on word-packed rows);
// rationals use fraction-free elimination after clearing denominators, so
// intermediate values stay integer minors instead of growing fractions.
// Row/column compaction first: all-zero rows and columns never affect rank,
// and partial derivative matrices of sparse polynomials are mostly empty.
std::size_t rank(const ExactMatrix<Fp>& m);
std::size_t rank(const ExactMatrix<Rat>& m);

// Straight-line single-threaded elimination, kept as the reference the
// parallel kernels are tested against.
std::size_t rank_serial(const ExactMatrix<Fp>& m);
std::size_t rank_serial(const ExactMatrix<Rat>& m);

// Basis of {v : m v = 0} from the reduced row echelon form; the RREF is
// unique, so the basis is canonical no matter how many threads ran.
// Basis size is always cols - rank.
std::vector<std::vector<Fp::elem>> nullspace_basis(const ExactMatrix<Fp>& m);

inline std::vector<std::vector<Rat::elem>> nullspace_basis(const ExactMatrix<Rat>&) {
    throw DomainError("nullspace_basis: unsupported context (only needed over F_p)");
}

} // namespace mlcirc
