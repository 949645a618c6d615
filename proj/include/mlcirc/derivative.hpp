#pragma once

#include <map>
#include <set>
#include <vector>

#include "mlcirc/circuit.hpp"

namespace mlcirc {

// Circuit with n outputs, the i-th computing the partial derivative of the
// source circuit's polynomial by x_i. Construction re-verifies the four
// structural guarantees (output count, 5x size, syntactic multilinearity,
// x_i absent below the i-th output) and refuses to return otherwise.
template <class F>
struct DerivativeCircuit {
    Circuit<F> base;
    std::size_t origin_size = 0;
};

template <class F>
void verify_derivative_circuit(const DerivativeCircuit<F>& dc);

namespace detail {

// removes gates unreachable from the outputs, keeping relative order
template <class F>
Circuit<F> prune_unreachable(const Circuit<F>& c) {
    c.ensure_valid();
    std::vector<bool> live(c.size(), false);
    std::vector<std::size_t> stack;
    for (long long out : c.outputs()) {
        std::size_t i = c.index_of(out);
        if (!live[i]) {
            live[i] = true;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        const auto& g = c.gates()[i];
        if (g.op == GateOp::Add || g.op == GateOp::Mul) {
            for (std::size_t ch : {c.left_index(i), c.right_index(i)}) {
                if (!live[ch]) {
                    live[ch] = true;
                    stack.push_back(ch);
                }
            }
        }
    }
    Circuit<F> out(c.field(), c.n());
    for (std::size_t i = 0; i < c.size(); ++i)
        if (live[i]) out.push(c.gates()[i]);
    for (long long o : c.outputs()) out.add_output(o);
    return out;
}

} // namespace detail

// Reverse-mode construction of the derivative circuit: one adjoint per
// gate, built top-down in a fixed topological order (adjoint of the root
// is the constant 1; a product edge multiplies the parent adjoint by the
// sibling subcircuit, a sum edge passes it through; contributions
// accumulate by ascending parent gate id). The published statement leaves
// the construction to its reference, so every guarantee is re-checked here
// rather than trusted.
template <class F>
DerivativeCircuit<F> bs_transform(const Circuit<F>& c) {
    c.ensure_valid();
    if (c.outputs().size() != 1) throw DomainError("bs_transform needs a single-output circuit");
    {
        auto [ok, bad] = is_syntactically_multilinear(c);
        if (!ok)
            throw DomainError("bs_transform input is not syntactically multilinear (gate " +
                              std::to_string(*bad) + ")");
    }
    const F& fld = c.field();
    const int n = c.n();
    const std::size_t root = c.index_of(c.outputs()[0]);

    Circuit<F> out(fld, n);
    // fresh ids above the originals keep both id spaces disjoint
    long long next_id = 0;
    for (const auto& g : c.gates()) next_id = std::max(next_id, g.id + 1);

    // copy the forward gates verbatim (pruning drops the unused ones later)
    for (const auto& g : c.gates()) out.push(g);

    // adjoint contributions per source gate, keyed by (parent id, side) so
    // the accumulation order is a fixed function of the input
    std::vector<std::vector<std::pair<long long, long long>>> contrib(c.size());
    // walk parents in topological order; only gates that reach the root
    // carry adjoints
    std::vector<bool> reaches_root(c.size(), false);
    reaches_root[root] = true;
    std::map<std::size_t, long long> adjoint; // dense index -> adjoint gate id

    auto topo = c.topo_order();
    // top-down: reverse topological order
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        std::size_t i = *it;
        if (!reaches_root[i]) continue;
        long long adj;
        if (i == root) {
            adj = next_id++;
            Gate<F> one;
            one.id = adj;
            one.op = GateOp::Const;
            one.value = fld.one();
            out.push(one);
        } else {
            auto& parts = contrib[i];
            std::sort(parts.begin(), parts.end());
            adj = parts[0].second;
            for (std::size_t k = 1; k < parts.size(); ++k) {
                Gate<F> acc;
                acc.id = next_id++;
                acc.op = GateOp::Add;
                acc.left = adj;
                acc.right = parts[k].second;
                out.push(acc);
                adj = acc.id;
            }
        }
        adjoint[i] = adj;

        const auto& g = c.gates()[i];
        if (g.op == GateOp::Add) {
            for (std::size_t ch : {c.left_index(i), c.right_index(i)}) {
                contrib[ch].emplace_back(g.id, adj);
                reaches_root[ch] = true;
            }
        } else if (g.op == GateOp::Mul) {
            std::size_t l = c.left_index(i), r = c.right_index(i);
            // d(l*r)/dl = r and vice versa
            Gate<F> ml;
            ml.id = next_id++;
            ml.op = GateOp::Mul;
            ml.left = adj;
            ml.right = c.gates()[r].id;
            out.push(ml);
            contrib[l].emplace_back(g.id, ml.id);
            reaches_root[l] = true;

            Gate<F> mr;
            mr.id = next_id++;
            mr.op = GateOp::Mul;
            mr.left = adj;
            mr.right = c.gates()[l].id;
            out.push(mr);
            contrib[r].emplace_back(g.id, mr.id);
            reaches_root[r] = true;
        }
    }

    // derivative by x_i = sum of adjoints of the leaves labeled x_i; a
    // single shared zero stands in for absent variables
    std::vector<std::vector<long long>> leaf_adjoints(n + 1);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& g = c.gates()[i];
        if (g.op == GateOp::Var && reaches_root[i] && adjoint.count(i))
            leaf_adjoints[g.var].push_back(adjoint[i]);
    }
    long long zero_id = -1;
    for (int v = 1; v <= n; ++v) {
        if (leaf_adjoints[v].empty()) {
            if (zero_id < 0) {
                Gate<F> z;
                z.id = next_id++;
                z.op = GateOp::Const;
                z.value = fld.zero();
                out.push(z);
                zero_id = z.id;
            }
            out.add_output(zero_id);
            continue;
        }
        std::sort(leaf_adjoints[v].begin(), leaf_adjoints[v].end());
        long long acc = leaf_adjoints[v][0];
        for (std::size_t k = 1; k < leaf_adjoints[v].size(); ++k) {
            Gate<F> s;
            s.id = next_id++;
            s.op = GateOp::Add;
            s.left = acc;
            s.right = leaf_adjoints[v][k];
            out.push(s);
            acc = s.id;
        }
        out.add_output(acc);
    }

    DerivativeCircuit<F> dc{detail::prune_unreachable(out), c.size()};
    verify_derivative_circuit(dc);
    return dc;
}

// The four guarantees, checked as hard postconditions.
template <class F>
void verify_derivative_circuit(const DerivativeCircuit<F>& dc) {
    const auto& b = dc.base;
    b.ensure_valid();
    if (b.outputs().size() != static_cast<std::size_t>(b.n()))
        throw InvariantError("derivative circuit must have n outputs");
    if (dc.origin_size > 0 && b.size() > 5 * dc.origin_size)
        throw InvariantError("derivative circuit exceeds 5x the source size");
    auto [ok, bad] = is_syntactically_multilinear(b);
    if (!ok)
        throw InvariantError("derivative circuit lost syntactic multilinearity at gate " +
                             std::to_string(*bad));
    auto xs = var_sets(b);
    for (int i = 1; i <= b.n(); ++i) {
        std::size_t vi = b.index_of(b.outputs()[i - 1]);
        if (xs[vi] & (Mask{1} << (i - 1)))
            throw InvariantError("x_" + std::to_string(i) + " occurs below its own derivative output");
    }
}

// C_v: indices i such that v lies in the subcircuit rooted at the i-th
// output. |C_v| <= n - |X_v| is asserted (the structural consequence of
// the transform).
template <class F>
std::vector<std::set<int>> reachable_outputs(const DerivativeCircuit<F>& dc) {
    const auto& b = dc.base;
    b.ensure_valid();
    auto xs = var_sets(b);
    std::vector<std::set<int>> cv(b.size());
    for (int i = 1; i <= b.n(); ++i) {
        // reverse DFS from the i-th output
        std::vector<std::size_t> stack{b.index_of(b.outputs()[i - 1])};
        std::vector<bool> seen(b.size(), false);
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            if (seen[v]) continue;
            seen[v] = true;
            cv[v].insert(i);
            const auto& g = b.gates()[v];
            if (g.op == GateOp::Add || g.op == GateOp::Mul) {
                stack.push_back(b.left_index(v));
                stack.push_back(b.right_index(v));
            }
        }
    }
    for (std::size_t v = 0; v < b.size(); ++v) {
        if (static_cast<int>(cv[v].size()) > b.n() - popcount(xs[v]))
            throw InvariantError("|C_v| exceeds n - |X_v| at gate " + std::to_string(b.gates()[v].id));
    }
    return cv;
}

} // namespace mlcirc
