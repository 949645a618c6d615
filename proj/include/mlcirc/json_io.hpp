#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "mlcirc/circuit.hpp"
#include "mlcirc/field.hpp"
#include "mlcirc/poly.hpp"

namespace mlcirc {

using nlohmann::json;

inline json field_spec_to_json(const FieldSpec& spec) {
    if (spec.rational) return json("rational");
    return json{{"p", spec.p}};
}

inline FieldSpec field_spec_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "rational") return FieldSpec::make_rational();
        throw DomainError("unknown field spec: " + j.get<std::string>());
    }
    if (j.is_object() && j.contains("p")) return FieldSpec::make_prime(j.at("p").get<std::uint64_t>());
    throw DomainError("malformed field spec");
}

inline FieldSpec field_spec_of_file(const json& j) {
    if (!j.contains("field")) throw DomainError("file has no \"field\" key");
    return field_spec_from_json(j.at("field"));
}

template <class F>
FieldSpec field_spec_of(const F& fld) {
    if constexpr (F::is_rational)
        return FieldSpec::make_rational();
    else
        return FieldSpec{false, fld.modulus()};
}

// ---- polynomial files -------------------------------------------------
// {"n": int, "field": ..., "terms": [{"vars": [1-based sorted], "coef": "str"}]}
// Canonical form: terms ascending by monomial bitmask, no zero coefficients.

template <class F>
json poly_to_json(const MultilinearPoly<F>& f) {
    json terms = json::array();
    for (const auto& [m, c] : f.terms()) {
        json vars = json::array();
        Mask left = m;
        while (left) {
            int i = std::countr_zero(left);
            left &= left - 1;
            vars.push_back(i + 1);
        }
        terms.push_back(json{{"vars", vars}, {"coef", f.field().to_string(c)}});
    }
    return json{{"n", f.n()}, {"field", field_spec_to_json(field_spec_of(f.field()))}, {"terms", terms}};
}

template <class F>
MultilinearPoly<F> poly_from_json(const json& j, const F& fld) {
    MultilinearPoly<F> f(fld, j.at("n").get<int>());
    for (const auto& t : j.at("terms")) {
        Mask m = 0;
        for (const auto& v : t.at("vars")) {
            int i = v.get<int>();
            if (i < 1 || i > f.n()) throw DomainError("term variable out of range");
            m |= Mask{1} << (i - 1);
        }
        f.add_term(m, fld.from_string(t.at("coef").get<std::string>()));
    }
    return f;
}

// ---- circuit files -----------------------------------------------------
// {"n": int, "field": ..., "gates": [{"id", "op", "var"?, "value"?,
//  "left"?, "right"?}], "outputs": [ids]}

template <class F>
json circuit_to_json(const Circuit<F>& c) {
    json gates = json::array();
    auto sorted = c.gates();
    std::sort(sorted.begin(), sorted.end(), [](const Gate<F>& a, const Gate<F>& b) { return a.id < b.id; });
    for (const auto& g : sorted) {
        json jg{{"id", g.id}, {"op", gate_op_name(g.op)}};
        switch (g.op) {
            case GateOp::Var: jg["var"] = g.var; break;
            case GateOp::Const: jg["value"] = c.field().to_string(g.value); break;
            case GateOp::Add:
            case GateOp::Mul:
                if (g.left) jg["left"] = *g.left;
                if (g.right) jg["right"] = *g.right;
                break;
        }
        gates.push_back(jg);
    }
    return json{{"n", c.n()},
                {"field", field_spec_to_json(field_spec_of(c.field()))},
                {"gates", gates},
                {"outputs", c.outputs()}};
}

template <class F>
Circuit<F> circuit_from_json(const json& j, const F& fld) {
    Circuit<F> c(fld, j.at("n").get<int>());
    for (const auto& jg : j.at("gates")) {
        Gate<F> g;
        g.id = jg.at("id").get<long long>();
        std::string op = jg.at("op").get<std::string>();
        if (op == "var") {
            g.op = GateOp::Var;
            g.var = jg.at("var").get<int>();
        } else if (op == "const") {
            g.op = GateOp::Const;
            g.value = fld.from_string(jg.at("value").get<std::string>());
        } else if (op == "add" || op == "mul") {
            g.op = op == "add" ? GateOp::Add : GateOp::Mul;
            if (jg.contains("left")) g.left = jg.at("left").get<long long>();
            if (jg.contains("right")) g.right = jg.at("right").get<long long>();
        } else {
            throw DomainError("unknown gate op: " + op);
        }
        c.push(g);
    }
    for (const auto& o : j.at("outputs")) c.add_output(o.get<long long>());
    return c;
}

// ---- helpers -----------------------------------------------------------

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    json j;
    in >> j;
    return j;
}

// Canonical = compact separators, alphabetically ordered keys (the json
// object type is an ordered map, so dumping is deterministic).
inline std::string dump_json(const json& j, bool canonical) {
    return canonical ? j.dump() : j.dump(2);
}

inline void write_json_file(const std::string& path, const json& j, bool canonical) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path);
    out << dump_json(j, canonical) << '\n';
}

} // namespace mlcirc
