#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlcirc/errors.hpp"
#include "mlcirc/field.hpp"
#include "mlcirc/poly.hpp"

namespace mlcirc {

enum class GateOp { Var, Const, Add, Mul };

inline const char* gate_op_name(GateOp op) {
    switch (op) {
        case GateOp::Var: return "var";
        case GateOp::Const: return "const";
        case GateOp::Add: return "add";
        case GateOp::Mul: return "mul";
    }
    return "?";
}

template <class F>
struct Gate {
    long long id = 0;
    GateOp op = GateOp::Const;
    int var = 0;                  // 1-based variable index (Var)
    typename F::elem value{};     // constant (Const)
    std::optional<long long> left, right; // child ids (Add/Mul)
};

struct ValidationIssue {
    long long gate_id;
    std::string message;
};

// Arithmetic circuit: DAG of fan-in-0 leaves (variables, constants) and
// fan-in-2 sum/product gates, any number of outputs. Gates carry stable
// ids from the interchange format; topological order is computed, never
// required of the input.
template <class F>
class Circuit {
public:
    using elem = typename F::elem;

    Circuit(F field, int n) : field_(field), n_(n) {
        if (n < 0 || n > 62) throw DomainError("circuit: variable count out of range");
    }

    const F& field() const { return field_; }
    int n() const { return n_; }
    const std::vector<Gate<F>>& gates() const { return gates_; }
    const std::vector<long long>& outputs() const { return outputs_; }
    std::size_t size() const { return gates_.size(); }

    // builder API; fan-in is strictly two, n-ary conveniences lower here
    long long add_var(int i) {
        Gate<F> g;
        g.id = next_id();
        g.op = GateOp::Var;
        g.var = i;
        return push(g);
    }
    long long add_const(const elem& v) {
        Gate<F> g;
        g.id = next_id();
        g.op = GateOp::Const;
        g.value = v;
        return push(g);
    }
    long long add_add(long long a, long long b) {
        Gate<F> g;
        g.id = next_id();
        g.op = GateOp::Add;
        g.left = a;
        g.right = b;
        return push(g);
    }
    long long add_mul(long long a, long long b) {
        Gate<F> g;
        g.id = next_id();
        g.op = GateOp::Mul;
        g.left = a;
        g.right = b;
        return push(g);
    }
    long long add_nary(GateOp op, const std::vector<long long>& children) {
        if (op != GateOp::Add && op != GateOp::Mul) throw DomainError("add_nary: op must be add or mul");
        if (children.empty()) throw DomainError("add_nary: no children");
        long long acc = children[0];
        for (std::size_t i = 1; i < children.size(); ++i)
            acc = op == GateOp::Add ? add_add(acc, children[i]) : add_mul(acc, children[i]);
        return acc;
    }
    void add_output(long long id) {
        outputs_.push_back(id);
        dirty();
    }
    void clear_outputs() {
        outputs_.clear();
        dirty();
    }

    // raw insertion used by the file parser; no structural checks here,
    // validate() reports problems instead
    long long push(const Gate<F>& g) {
        gates_.push_back(g);
        dirty();
        return g.id;
    }

    std::vector<ValidationIssue> validate() const {
        std::vector<ValidationIssue> issues;
        std::map<long long, std::size_t> index;
        for (std::size_t i = 0; i < gates_.size(); ++i) {
            const auto& g = gates_[i];
            if (index.count(g.id)) issues.push_back({g.id, "duplicate gate id"});
            index[g.id] = i;
        }
        auto check_child = [&](const Gate<F>& g, const std::optional<long long>& ch, const char* side) {
            if (!ch) {
                issues.push_back({g.id, std::string(gate_op_name(g.op)) + " gate missing " + side + " child (fan-in must be 2)"});
                return;
            }
            if (!index.count(*ch)) issues.push_back({g.id, std::string("dangling ") + side + " child id " + std::to_string(*ch)});
        };
        for (const auto& g : gates_) {
            switch (g.op) {
                case GateOp::Var:
                    if (g.var < 1 || g.var > n_) issues.push_back({g.id, "variable index out of range"});
                    if (g.left || g.right) issues.push_back({g.id, "leaf gate with children"});
                    break;
                case GateOp::Const:
                    if (g.left || g.right) issues.push_back({g.id, "leaf gate with children"});
                    break;
                case GateOp::Add:
                case GateOp::Mul:
                    check_child(g, g.left, "left");
                    check_child(g, g.right, "right");
                    break;
            }
        }
        for (long long out : outputs_)
            if (!index.count(out)) issues.push_back({out, "output references missing gate"});
        if (!issues.empty()) return issues;

        // Kahn's algorithm; leftovers are on directed cycles
        std::vector<int> pending(gates_.size(), 0);
        std::vector<std::vector<std::size_t>> parents(gates_.size());
        for (std::size_t i = 0; i < gates_.size(); ++i) {
            const auto& g = gates_[i];
            if (g.op == GateOp::Add || g.op == GateOp::Mul) {
                pending[i] = 2;
                parents[index.at(*g.left)].push_back(i);
                parents[index.at(*g.right)].push_back(i);
            }
        }
        std::vector<std::size_t> queue;
        for (std::size_t i = 0; i < gates_.size(); ++i)
            if (pending[i] == 0) queue.push_back(i);
        std::size_t done = 0;
        while (done < queue.size()) {
            std::size_t v = queue[done++];
            for (std::size_t p : parents[v])
                if (--pending[p] == 0) queue.push_back(p);
        }
        if (queue.size() != gates_.size()) {
            for (std::size_t i = 0; i < gates_.size(); ++i)
                if (pending[i] > 0) issues.push_back({gates_[i].id, "gate lies on a directed cycle"});
        }
        return issues;
    }

    // dense index of a gate id
    std::size_t index_of(long long id) const {
        ensure_valid();
        auto it = index_.find(id);
        if (it == index_.end()) throw DomainError("unknown gate id " + std::to_string(id));
        return it->second;
    }

    // indices in a topological order (children before parents); ties broken
    // by ascending gate id for determinism
    const std::vector<std::size_t>& topo_order() const {
        ensure_valid();
        return topo_;
    }

    std::size_t left_index(std::size_t i) const { return index_.at(*gates_[i].left); }
    std::size_t right_index(std::size_t i) const { return index_.at(*gates_[i].right); }

    void ensure_valid() const {
        if (cached_) return;
        auto issues = validate();
        if (!issues.empty())
            throw DomainError("invalid circuit: gate " + std::to_string(issues[0].gate_id) + ": " + issues[0].message);
        index_.clear();
        for (std::size_t i = 0; i < gates_.size(); ++i) index_[gates_[i].id] = i;
        // Kahn with an id-ordered frontier
        std::vector<int> pending(gates_.size(), 0);
        std::vector<std::vector<std::size_t>> parents(gates_.size());
        for (std::size_t i = 0; i < gates_.size(); ++i) {
            const auto& g = gates_[i];
            if (g.op == GateOp::Add || g.op == GateOp::Mul) {
                pending[i] = 2;
                parents[index_.at(*g.left)].push_back(i);
                parents[index_.at(*g.right)].push_back(i);
            }
        }
        auto cmp = [&](std::size_t a, std::size_t b) { return gates_[a].id > gates_[b].id; };
        std::vector<std::size_t> heap;
        for (std::size_t i = 0; i < gates_.size(); ++i)
            if (pending[i] == 0) heap.push_back(i);
        std::make_heap(heap.begin(), heap.end(), cmp);
        topo_.clear();
        while (!heap.empty()) {
            std::pop_heap(heap.begin(), heap.end(), cmp);
            std::size_t v = heap.back();
            heap.pop_back();
            topo_.push_back(v);
            for (std::size_t p : parents[v]) {
                if (--pending[p] == 0) {
                    heap.push_back(p);
                    std::push_heap(heap.begin(), heap.end(), cmp);
                }
            }
        }
        cached_ = true;
    }

private:
    long long next_id() const { return gates_.empty() ? 0 : gates_.back().id + 1; }
    void dirty() { cached_ = false; }

    F field_;
    int n_;
    std::vector<Gate<F>> gates_;
    std::vector<long long> outputs_;

    mutable bool cached_ = false;
    mutable std::map<long long, std::size_t> index_;
    mutable std::vector<std::size_t> topo_;
};

// X_v for every gate, one bottom-up pass. Indexed by dense gate position.
template <class F>
std::vector<Mask> var_sets(const Circuit<F>& c) {
    c.ensure_valid();
    std::vector<Mask> xs(c.size(), 0);
    for (std::size_t i : c.topo_order()) {
        const auto& g = c.gates()[i];
        switch (g.op) {
            case GateOp::Var: xs[i] = Mask{1} << (g.var - 1); break;
            case GateOp::Const: xs[i] = 0; break;
            case GateOp::Add:
            case GateOp::Mul: xs[i] = xs[c.left_index(i)] | xs[c.right_index(i)]; break;
        }
    }
    return xs;
}

// True iff every product gate has variable-disjoint children (X_u, X_w
// computed syntactically). On failure also returns the first violating
// gate id in topological order.
template <class F>
std::pair<bool, std::optional<long long>> is_syntactically_multilinear(const Circuit<F>& c) {
    auto xs = var_sets(c);
    for (std::size_t i : c.topo_order()) {
        const auto& g = c.gates()[i];
        if (g.op == GateOp::Mul && (xs[c.left_index(i)] & xs[c.right_index(i)]))
            return {false, g.id};
    }
    return {true, std::nullopt};
}

// Evaluates every gate at a point; returns values by dense gate position.
template <class F>
std::vector<typename F::elem> eval_gates(const Circuit<F>& c, const std::vector<typename F::elem>& point) {
    if (static_cast<int>(point.size()) != c.n()) throw DomainError("eval: point length != variable count");
    const F& fld = c.field();
    std::vector<typename F::elem> val(c.size(), fld.zero());
    for (std::size_t i : c.topo_order()) {
        const auto& g = c.gates()[i];
        switch (g.op) {
            case GateOp::Var: val[i] = point[g.var - 1]; break;
            case GateOp::Const: val[i] = g.value; break;
            case GateOp::Add: val[i] = fld.add(val[c.left_index(i)], val[c.right_index(i)]); break;
            case GateOp::Mul: val[i] = fld.mul(val[c.left_index(i)], val[c.right_index(i)]); break;
        }
    }
    return val;
}

namespace detail {

// General sparse polynomial on exponent vectors, for circuits that are not
// syntactically multilinear. Only used by the semantic checks at guarded
// sizes; term count and exponents are capped.
template <class F>
using GeneralPoly = std::map<std::vector<std::uint32_t>, typename F::elem>;

inline constexpr std::size_t kGeneralTermCap = 2'000'000;
inline constexpr std::uint32_t kGeneralExpCap = 1u << 20;

template <class F>
void general_add_term(const F& fld, GeneralPoly<F>& p, const std::vector<std::uint32_t>& e,
                      const typename F::elem& c) {
    if (fld.is_zero(c)) return;
    auto it = p.find(e);
    if (it == p.end()) {
        p.emplace(e, c);
        if (p.size() > kGeneralTermCap) throw ResourceError("expansion exceeds the term guard");
    } else {
        it->second = fld.add(it->second, c);
        if (fld.is_zero(it->second)) p.erase(it);
    }
}

template <class F>
GeneralPoly<F> general_mul(const F& fld, const GeneralPoly<F>& a, const GeneralPoly<F>& b, int n) {
    GeneralPoly<F> r;
    std::vector<std::uint32_t> e(n, 0);
    for (const auto& [ea, ca] : a) {
        for (const auto& [eb, cb] : b) {
            for (int i = 0; i < n; ++i) {
                e[i] = ea[i] + eb[i];
                if (e[i] > kGeneralExpCap) throw ResourceError("expansion exceeds the degree guard");
            }
            general_add_term(fld, r, e, fld.mul(ca, cb));
        }
    }
    return r;
}

// Expands every gate generally (no multilinearity assumed).
template <class F>
std::vector<GeneralPoly<F>> expand_all_general(const Circuit<F>& c) {
    if (c.n() > 24) throw ResourceError("general expansion guarded at n <= 24");
    const F& fld = c.field();
    const int n = c.n();
    std::vector<GeneralPoly<F>> ps(c.size());
    for (std::size_t i : c.topo_order()) {
        const auto& g = c.gates()[i];
        switch (g.op) {
            case GateOp::Var: {
                std::vector<std::uint32_t> e(n, 0);
                e[g.var - 1] = 1;
                general_add_term(fld, ps[i], e, fld.one());
                break;
            }
            case GateOp::Const:
                general_add_term(fld, ps[i], std::vector<std::uint32_t>(n, 0), g.value);
                break;
            case GateOp::Add: {
                ps[i] = ps[c.left_index(i)];
                for (const auto& [e, cf] : ps[c.right_index(i)]) general_add_term(fld, ps[i], e, cf);
                break;
            }
            case GateOp::Mul:
                ps[i] = general_mul(fld, ps[c.left_index(i)], ps[c.right_index(i)], n);
                break;
        }
    }
    return ps;
}

} // namespace detail

// True iff the polynomial computed at every gate is multilinear. Unlike the
// syntactic test this sees through cancellations, so x1*(x1 - x1) passes.
template <class F>
bool is_semantically_multilinear(const Circuit<F>& c) {
    auto ps = detail::expand_all_general(c);
    for (const auto& p : ps)
        for (const auto& [e, cf] : p)
            for (std::uint32_t d : e)
                if (d > 1) return false;
    return true;
}

// Exact polynomial computed at `output_id`. Syntactically multilinear
// circuits expand on bitmask monomials; otherwise the general expander runs
// and any gate whose polynomial has a variable of degree two fails.
template <class F>
MultilinearPoly<F> expand(const Circuit<F>& c, long long output_id) {
    c.ensure_valid();
    if (c.n() > 24) throw ResourceError("expand guarded at n <= 24");
    const F& fld = c.field();
    std::size_t target = c.index_of(output_id);

    if (is_syntactically_multilinear(c).first) {
        std::vector<MultilinearPoly<F>> ps(c.size(), MultilinearPoly<F>(fld, c.n()));
        for (std::size_t i : c.topo_order()) {
            const auto& g = c.gates()[i];
            switch (g.op) {
                case GateOp::Var: ps[i].add_term(Mask{1} << (g.var - 1), fld.one()); break;
                case GateOp::Const: ps[i].add_term(0, g.value); break;
                case GateOp::Add: ps[i] = ps[c.left_index(i)].add(ps[c.right_index(i)]); break;
                case GateOp::Mul: ps[i] = ps[c.left_index(i)].mul_disjoint(ps[c.right_index(i)]); break;
            }
        }
        return ps[target];
    }

    auto ps = detail::expand_all_general(c);
    MultilinearPoly<F> out(fld, c.n());
    for (const auto& [e, cf] : ps[target]) {
        Mask m = 0;
        for (int i = 0; i < c.n(); ++i) {
            if (e[i] > 1) throw DomainError("expand: gate computes a non-multilinear polynomial");
            if (e[i]) m |= Mask{1} << i;
        }
        out.add_term(m, cf);
    }
    // other gates must be multilinear too for this entry point
    for (const auto& p : ps)
        for (const auto& [e, cf] : p)
            for (std::uint32_t d : e)
                if (d > 1) throw DomainError("expand: gate computes a non-multilinear polynomial");
    return out;
}

template <class F>
MultilinearPoly<F> expand_single_output(const Circuit<F>& c) {
    if (c.outputs().size() != 1) throw DomainError("circuit must have exactly one output");
    return expand(c, c.outputs()[0]);
}

} // namespace mlcirc
