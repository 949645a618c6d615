// mlcirc: exact-arithmetic toolkit for syntactically multilinear circuit
// analysis, partial-derivative-matrix rank, set-family balancing searches,
// and the finite-field polynomial-method pipelines.
//
// Exit codes: 0 success/verified, 1 property failure (JSON diagnostics on
// stdout), 2 usage or malformed input, 3 resource guard.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlcirc/derivative.hpp"
#include "mlcirc/fullrank.hpp"
#include "mlcirc/json_io.hpp"
#include "mlcirc/leveled.hpp"
#include "mlcirc/polymethod.hpp"
#include "mlcirc/runtime.hpp"
#include "mlcirc/setfam.hpp"

using namespace mlcirc;
using nlohmann::json;

namespace {

constexpr const char* kSchema = "mlcirc-report/1";

struct GlobalOpts {
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool require_seed = false;
    int threads = 0;
    bool canonical = false;
    std::string out_path;
};

GlobalOpts g_opts;

void emit(const json& report, bool ok_line, const std::string& summary) {
    std::cout << dump_json(report, true) << '\n';
    std::cerr << (ok_line ? "ok: " : "FAIL: ") << summary << '\n';
}

void write_output(const json& j) {
    if (g_opts.out_path.empty())
        std::cout << dump_json(j, g_opts.canonical) << '\n';
    else
        write_json_file(g_opts.out_path, j, g_opts.canonical);
}

void check_seed_given() {
    if (g_opts.require_seed && !g_opts.seed_given)
        throw CLI::ValidationError("--require-seed is set and this subcommand is randomized: pass --seed");
}

json family_to_json(const SetFamily& fam) {
    json sets = json::array();
    for (const auto& s : fam.sets) {
        json one = json::array();
        for (auto e : s) one.push_back(e + 1);
        sets.push_back(one);
    }
    return json{{"n", fam.n}, {"sets", sets}};
}

SetFamily family_from_json(const json& j) {
    SetFamily fam;
    fam.n = j.at("n").get<int>();
    for (const auto& s : j.at("sets")) {
        std::vector<std::uint32_t> one;
        for (const auto& e : s) {
            long long v = e.get<long long>();
            if (v < 1 || v > fam.n) throw DomainError("set element out of range");
            one.push_back(static_cast<std::uint32_t>(v - 1));
        }
        std::sort(one.begin(), one.end());
        fam.sets.push_back(std::move(one));
    }
    fam.check_wellformed();
    return fam;
}

json mask_to_vars(Mask m) {
    json out = json::array();
    while (m) {
        int i = std::countr_zero(m);
        m &= m - 1;
        out.push_back(i + 1);
    }
    return out;
}

template <class F>
std::vector<typename F::elem> parse_point(const F& fld, const std::string& csv, int n) {
    std::vector<typename F::elem> pt;
    std::string cur;
    for (char ch : csv + ",") {
        if (ch == ',') {
            if (!cur.empty()) pt.push_back(fld.from_string(cur));
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    if (static_cast<int>(pt.size()) != n)
        throw DomainError("point has " + std::to_string(pt.size()) + " coordinates, expected " + std::to_string(n));
    return pt;
}

Mask parse_var_list(const std::string& csv, int n) {
    Mask m = 0;
    std::string cur;
    for (char ch : csv + ",") {
        if (ch == ',') {
            if (!cur.empty()) {
                int v = std::stoi(cur);
                if (v < 1 || v > n) throw DomainError("variable index out of range: " + cur);
                m |= Mask{1} << (v - 1);
            }
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    return m;
}

// ---- subcommand bodies (each returns the process exit code) --------------

int cmd_validate(const std::string& in) {
    auto j = load_json_file(in);
    auto spec = field_spec_of_file(j);
    return with_field(spec, [&](auto fld) {
        auto c = circuit_from_json(j, fld);
        auto issues = c.validate();
        json rep{{"schema", kSchema}, {"command", "validate"}, {"valid", issues.empty()}};
        json list = json::array();
        for (const auto& i : issues) list.push_back(json{{"gate", i.gate_id}, {"message", i.message}});
        rep["issues"] = list;
        if (!issues.empty()) {
            emit(rep, false, std::to_string(issues.size()) + " issue(s)");
            return 1;
        }
        auto [ml, bad] = is_syntactically_multilinear(c);
        rep["syntactically_multilinear"] = ml;
        if (!ml) rep["first_violating_gate"] = *bad;
        emit(rep, true, "valid circuit, " + std::to_string(c.size()) + " gate(s)");
        return 0;
    });
}

int cmd_expand(const std::string& in) {
    auto j = load_json_file(in);
    auto spec = field_spec_of_file(j);
    return with_field(spec, [&](auto fld) {
        auto c = circuit_from_json(j, fld);
        if (c.outputs().empty()) throw DomainError("circuit has no outputs");
        auto p = expand(c, c.outputs()[0]);
        write_output(poly_to_json(p));
        std::cerr << "ok: " << p.terms().size() << " term(s)\n";
        return 0;
    });
}

int cmd_eval(const std::string& in, const std::string& point_csv) {
    auto j = load_json_file(in);
    auto spec = field_spec_of_file(j);
    return with_field(spec, [&](auto fld) {
        json rep{{"schema", kSchema}, {"command", "eval"}};
        std::string value;
        if (j.contains("terms")) {
            auto p = poly_from_json(j, fld);
            value = fld.to_string(p.eval(parse_point(fld, point_csv, p.n())));
        } else {
            auto c = circuit_from_json(j, fld);
            auto vals = eval_gates(c, parse_point(fld, point_csv, c.n()));
            json outs = json::array();
            for (auto o : c.outputs()) outs.push_back(fld.to_string(vals[c.index_of(o)]));
            rep["outputs"] = outs;
            value = outs.empty() ? "" : outs[0].template get<std::string>();
        }
        rep["value"] = value;
        emit(rep, true, "value " + value);
        return 0;
    });
}

int cmd_derive(const std::string& in) {
    auto j = load_json_file(in);
    auto spec = field_spec_of_file(j);
    return with_field(spec, [&](auto fld) {
        auto c = circuit_from_json(j, fld);
        auto dc = bs_transform(c); // re-verifies all four guarantees
        if (!g_opts.out_path.empty()) write_json_file(g_opts.out_path, circuit_to_json(dc.base), g_opts.canonical);
        json rep{{"schema", kSchema},
                 {"command", "derive"},
                 {"origin_size", dc.origin_size},
                 {"size", dc.base.size()},
                 {"size_ratio_ok", dc.base.size() <= 5 * dc.origin_size},
                 {"outputs", dc.base.outputs().size()},
                 {"syntactically_multilinear", true},
                 {"var_exclusion_ok", true}};
        emit(rep, true,
             "derivative circuit: " + std::to_string(dc.base.size()) + " gates from " +
                 std::to_string(dc.origin_size));
        return 0;
    });
}

int cmd_pdm_rank(const std::string& in, const std::string& yvars) {
    auto j = load_json_file(in);
    auto spec = field_spec_of_file(j);
    return with_field(spec, [&](auto fld) {
        auto p = poly_from_json(j, fld);
        Partition part(p.n(), parse_var_list(yvars, p.n()));
        auto pdm = build_pdm(p, part);
        auto r = rank(pdm.matrix);
        json rep{{"schema", kSchema},      {"command", "pdm-rank"},
                 {"rows", pdm.matrix.rows()}, {"cols", pdm.matrix.cols()},
                 {"rank", r},              {"y", mask_to_vars(part.y_mask)},
                 {"balanced", part.balanced()}};
        emit(rep, true, "rank " + std::to_string(r));
        return 0;
    });
}

int cmd_leveled(const std::string& in, int k) {
    auto j = load_json_file(in);
    auto spec = field_spec_of_file(j);
    return with_field(spec, [&](auto fld) {
        auto c = circuit_from_json(j, fld);
        auto ls = leveled_sets(c, k);
        json rep{{"schema", kSchema}, {"command", "leveled"}, {"k", k},
                 {"lower", ls.lower}, {"upper", ls.upper},
                 {"lower_size", ls.lower.size()}, {"upper_size", ls.upper.size()},
                 {"fanin_bound_ok", ls.lower.size() <= 2 * ls.upper.size()}};
        emit(rep, true,
             "|lower| = " + std::to_string(ls.lower.size()) + ", |upper| = " + std::to_string(ls.upper.size()));
        return 0;
    });
}

template <class F>
json decomposition_to_json(const Decomposition<F>& dec) {
    json pairs = json::array();
    for (std::size_t i = 0; i < dec.pairs.size(); ++i) {
        pairs.push_back(json{{"gate", dec.lower_ids[i]},
                             {"g", poly_to_json(dec.pairs[i].first)},
                             {"h", poly_to_json(dec.pairs[i].second)}});
    }
    return json{{"schema", kSchema},
                {"command", "decompose"},
                {"pairs", pairs},
                {"residual", poly_to_json(dec.residual)},
                {"tau", dec.tau},
                {"residual_degree", dec.residual_degree},
                {"residual_degree_within_200tau", dec.residual_degree_ok}};
}

int cmd_decompose(const std::string& in, int k, int tau) {
    auto j = load_json_file(in);
    auto spec = field_spec_of_file(j);
    return with_field(spec, [&](auto fld) {
        auto c = circuit_from_json(j, fld);
        auto dec = decompose(c, k, tau); // identity verified internally
        write_output(decomposition_to_json(dec));
        std::cerr << "ok: " << dec.pairs.size() << " pair(s), residual degree " << dec.residual_degree
                  << "\n";
        return 0;
    });
}

int cmd_setfam_construct(const std::string& kind, int g, int n, int tau) {
    SetFamily fam;
    if (kind == "galvin")
        fam = galvin_interval_family(g);
    else if (kind == "interval")
        fam = interval_tau_family(n, tau);
    else
        throw CLI::ValidationError("--kind must be galvin or interval");
    write_output(family_to_json(fam));
    std::cerr << "ok: " << fam.sets.size() << " set(s) over [" << fam.n << "]\n";
    return 0;
}

int cmd_setfam_covers(const std::string& in, int tau, bool strict) {
    auto fam = family_from_json(load_json_file(in));
    auto r = covers(fam, tau, strict);
    json rep{{"schema", kSchema}, {"command", "setfam covers"},   {"tau", tau},
             {"strict", strict},  {"covers", r.covers},           {"partitions_checked", r.partitions_checked}};
    if (r.witness_y) rep["witness_y"] = mask_to_vars(*r.witness_y);
    emit(rep, r.covers, r.covers ? "family covers" : "witness partition unbalances every set");
    return r.covers ? 0 : 1;
}

int cmd_setfam_search(int n, int tau, int lo, int hi, bool exact, bool strict) {
    auto r = min_family_search(n, tau, lo, hi, exact, strict);
    json rep{{"schema", kSchema}, {"command", "setfam search"}, {"n", n},
             {"tau", tau},        {"exact_balance", exact},     {"feasible", r.feasible},
             {"nodes", r.nodes}};
    if (!r.feasible) {
        rep["uncoverable_partition"] = mask_to_vars(*r.uncoverable);
        emit(rep, false, "no family of any size covers");
        return 1;
    }
    rep["m"] = r.m;
    rep["witness"] = family_to_json(r.witness);
    emit(rep, true, "minimal m = " + std::to_string(r.m));
    return 0;
}

int cmd_setfam_unbalance(const std::string& in, int tau, const std::string& mode, std::uint64_t budget) {
    auto fam = family_from_json(load_json_file(in));
    SearchMode sm;
    if (mode == "exhaustive")
        sm = SearchMode::Exhaustive;
    else if (mode == "randomized") {
        sm = SearchMode::Randomized;
        check_seed_given();
    } else
        throw CLI::ValidationError("--mode must be exhaustive or randomized");
    auto r = find_unbalancing_partition(fam, tau, sm, budget, g_opts.seed);
    json rep{{"schema", kSchema}, {"command", "setfam unbalance"}, {"tau", tau},
             {"mode", mode},      {"tried", r.tried},              {"found", r.partition.has_value()}};
    if (r.partition) rep["partition_y"] = mask_to_vars(r.partition->y_mask);
    emit(rep, r.partition.has_value(),
         r.partition ? "unbalancing partition found" : "not found");
    return r.partition ? 0 : 1;
}

int cmd_setfam_hypergeom(unsigned M, unsigned N, unsigned k, std::optional<unsigned> i, std::optional<double> t) {
    json rep{{"schema", kSchema}, {"command", "setfam hypergeom"}, {"M", M}, {"N", N}, {"k", k}};
    if (i) {
        auto q = hypergeom_pmf(M, N, k, *i);
        rep["i"] = *i;
        rep["pmf"] = q.get_str();
    }
    if (t) {
        rep["t"] = *t;
        rep["tail_bound"] = hypergeom_tail_bound(M, N, k, *t);
    }
    emit(rep, true, "hypergeometric report");
    return 0;
}

int cmd_hegedus(std::uint64_t p, bool allow_heavy) {
    auto r = hegedus_verify(p, allow_heavy);
    json rep{{"schema", kSchema}, {"command", "polymethod hegedus"},
             {"p", p},            {"pass", r.pass},
             {"rows", r.rows},    {"cols", r.cols},
             {"rank", r.rank},    {"nullity", r.nullity}};
    if (!r.pass) {
        rep["violating_point"] = mask_to_vars(*r.violating_point);
        json poly = json::array();
        for (auto [m, c] : r.violating_poly) poly.push_back(json{{"vars", mask_to_vars(m)}, {"coef", c}});
        rep["violating_poly"] = poly;
    }
    emit(rep, r.pass, r.pass ? "pass" : "counterexample found");
    return r.pass ? 0 : 1;
}

json witness_report_to_json(const WitnessReport& rep) {
    json steps = json::array();
    for (const auto& s : rep.steps) steps.push_back(json{{"name", s.name}, {"ok", s.ok}, {"detail", s.detail}});
    json out{{"schema", kSchema}, {"command", "polymethod witness"},
             {"steps", steps},    {"p", rep.p},
             {"tau", rep.tau},    {"m", rep.m},
             {"degree", rep.degree}, {"degree_bound", rep.degree_bound},
             {"t_found", rep.t_found}};
    if (rep.t_found) {
        json t = json::array();
        for (auto e : rep.T) t.push_back(e + 1);
        out["T"] = t;
    }
    if (rep.t_stages) {
        out["t_stages"] = json{{"t1", rep.t_stages->t1},   {"t2", rep.t_stages->t2},
                               {"t3", rep.t_stages->t3},   {"t4", rep.t_stages->t4},
                               {"aborted", rep.t_stages->aborted}, {"verified", rep.t_stages->verified},
                               {"t2_in_band", rep.t_stages->t2_in_band},
                               {"t3_small", rep.t_stages->t3_small},
                               {"t4_small", rep.t_stages->t4_small}};
    }
    if (rep.unbalancing_partition) out["unbalancing_partition_y"] = mask_to_vars(rep.unbalancing_partition->y_mask);
    return out;
}

int cmd_witness(const std::string& in, int tau, const std::string& mode, bool desk) {
    check_seed_given();
    auto fam = family_from_json(load_json_file(in));
    WitnessMode wm;
    if (mode == "special")
        wm = WitnessMode::Special;
    else if (mode == "general")
        wm = WitnessMode::General;
    else
        throw CLI::ValidationError("--mode must be special or general");
    auto rep = witness_pipeline(fam, tau, wm, g_opts.seed,
                                desk ? PolymethodConstants::desk() : PolymethodConstants::paper());
    bool ok = rep.all_ok();
    emit(witness_report_to_json(rep), ok, ok ? "every step verified" : "some step failed (see report)");
    return ok ? 0 : 1;
}

int cmd_fullrank_build(int n, const std::string& omega_csv, std::uint64_t p) {
    auto fp = fullrank_build(n);
    if (!omega_csv.empty()) {
        Fp fld(p);
        auto f = fullrank_specialize(fp, fld, parse_point(fld, omega_csv, n));
        write_output(poly_to_json(f));
        std::cerr << "ok: specialized to " << f.terms().size() << " term(s)\n";
        return 0;
    }
    // structural form: r_B as an omega-subset plus the pairing
    json terms = json::array();
    for (const auto& t : fp.terms) {
        json pairs = json::array();
        for (auto [a, b] : t.pairs) pairs.push_back(json::array({a, b}));
        terms.push_back(json{{"omega_vars", mask_to_vars(t.b_mask)}, {"pairs", pairs}});
    }
    write_output(json{{"n", n}, {"terms", terms}});
    std::cerr << "ok: " << fp.terms.size() << " structural term(s)\n";
    return 0;
}

int cmd_fullrank_verify(int n, const std::string& method, std::uint64_t p) {
    FullRankMethod m;
    if (method == "indicator")
        m = FullRankMethod::Indicator;
    else if (method == "random") {
        m = FullRankMethod::Random;
        check_seed_given();
    } else
        throw CLI::ValidationError("--method must be indicator or random");
    Fp fld(p);
    auto rep = fullrank_verify(fullrank_build(n), fld, m, g_opts.seed);
    json out{{"schema", kSchema}, {"command", "fullrank verify"},
             {"n", n},            {"method", method},
             {"p", p},            {"partitions", rep.partitions},
             {"passed", rep.passed}};
    json fails = json::array();
    for (auto y : rep.failures) fails.push_back(mask_to_vars(y));
    out["failures"] = fails;
    bool ok = rep.all_pass();
    emit(out, ok,
         std::to_string(rep.passed) + "/" + std::to_string(rep.partitions) + " partitions at rank 2^" +
             std::to_string(n / 2));
    return ok ? 0 : 1;
}

template <class F>
json collapse_to_json(const RankCollapseReport& rep) {
    json pairs = json::array();
    for (const auto& pr : rep.pairs)
        pairs.push_back(json{{"gate", pr.gate_id},
                             {"actual_rank", pr.actual_rank},
                             {"bound", pr.bound},
                             {"bound_holds", pr.bound_holds},
                             {"tau_unbalanced", pr.tau_unbalanced}});
    return json{{"pairs", pairs},
                {"residual_rank", rep.residual_rank},
                {"residual_bound", rep.residual_bound},
                {"residual_degree", rep.residual_degree},
                {"total_bound", rep.total_bound},
                {"actual_rank", rep.actual_rank},
                {"collapse_bound_holds", rep.collapse_bound_holds}};
}

int cmd_pipeline(const std::string& in, int tau, int k) {
    auto j = load_json_file(in);
    auto spec = field_spec_of_file(j);
    return with_field(spec, [&](auto fld) {
        using F = decltype(fld);
        auto c = circuit_from_json(j, fld);
        const int n = c.n();
        json rep{{"schema", kSchema}, {"command", "pipeline"}, {"tau", tau}, {"k", k},
                 {"input", json{{"n", n}, {"size", c.size()}}}};

        auto dc = bs_transform(c);
        rep["derivative"] = json{{"size", dc.base.size()},
                                 {"ratio_ok", dc.base.size() <= 5 * dc.origin_size}};

        // per-output leveled sets on the subcircuit rooted at each output
        auto whole = leveled_sets(dc.base, k);
        auto cv = reachable_outputs(dc); // asserts |C_v| <= n - |X_v|
        std::size_t sum_lower = 0, sum_upper = 0;
        json per_output = json::array();
        {
            for (int i = 1; i <= n; ++i) {
                // restrict to gates reachable from output i
                Circuit<F> sub(dc.base.field(), n);
                for (std::size_t v = 0; v < dc.base.size(); ++v)
                    if (cv[v].count(i)) sub.push(dc.base.gates()[v]);
                sub.add_output(dc.base.outputs()[i - 1]);
                auto ls = leveled_sets(sub, k);
                sum_lower += ls.lower.size();
                sum_upper += ls.upper.size();
                per_output.push_back(json{{"i", i},
                                          {"lower_size", ls.lower.size()},
                                          {"upper_size", ls.upper.size()},
                                          {"fanin_bound_ok", ls.lower.size() <= 2 * ls.upper.size()}});
            }
        }
        rep["per_output"] = per_output;

        // the counting chain, every quantity recomputed in the report
        std::size_t max_cu = 0;
        for (const auto& s : cv) max_cu = std::max(max_cu, s.size());
        double lhs = static_cast<double>(n) * (static_cast<double>(n) / (1e5 * tau));
        rep["counting"] = json{{"n_times_n_over_1e5tau", lhs},
                               {"sum_lower", sum_lower},
                               {"sum_upper_doubled", 2 * sum_upper},
                               {"upper_bound_via_cu", 2.0 * static_cast<double>(whole.upper.size()) * 100.0 * tau},
                               {"max_cu", max_cu},
                               {"sum_lower_le_2sum_upper", sum_lower <= 2 * sum_upper}};

        // unbalancing-partition search over the lower gates' variable sets
        auto xs = var_sets(dc.base);
        SetFamily fam;
        fam.n = n;
        for (long long id : whole.lower) {
            Mask x = xs[dc.base.index_of(id)];
            std::vector<std::uint32_t> s;
            for (int b = 0; b < n; ++b)
                if (x & (Mask{1} << b)) s.push_back(static_cast<std::uint32_t>(b));
            fam.sets.push_back(std::move(s));
        }
        std::optional<BalancedPartition> found;
        if (!fam.sets.empty()) {
            auto ur = find_unbalancing_partition(fam, tau, SearchMode::Exhaustive);
            found = ur.partition;
            rep["partition_search"] = json{{"sets", fam.sets.size()},
                                           {"tried", ur.tried},
                                           {"found", found.has_value()}};
            if (found) rep["partition_search"]["y"] = mask_to_vars(found->y_mask);
        } else {
            rep["partition_search"] = json{{"sets", 0}, {"found", false},
                                           {"note", "no lower-leveled gates at this k"}};
        }

        // rank stage on the original circuit under the found partition
        if (found && n <= 12) {
            auto col = rank_collapse_check(c, tau, k, Partition(n, found->y_mask));
            rep["rank_collapse"] = collapse_to_json<F>(col);
        }

        emit(rep, true, "pipeline complete");
        return 0;
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact toolkit for multilinear circuit rank analysis"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags are accepted after subcommand names
    app.add_option("--seed", g_opts.seed, "seed for randomized subcommands")
        ->each([](const std::string&) { g_opts.seed_given = true; });
    app.add_flag("--require-seed", g_opts.require_seed, "fail randomized subcommands without --seed");
    app.add_option("--threads", g_opts.threads, "cap parallel threads (0 = available parallelism)");
    app.add_flag("--canonical", g_opts.canonical, "compact canonical JSON output");
    app.add_option("-o,--out", g_opts.out_path, "output file (stdout when omitted)");

    std::string in, point, yvars, kind = "galvin", mode = "exhaustive", method = "indicator", omega;
    int k = 0, tau = 1, g = 1, n = 8, lo = 1, hi = 1;
    unsigned hM = 1, hN = 1, hk = 1;
    std::optional<unsigned> hi_i;
    std::optional<double> hi_t;
    std::uint64_t p = 2, budget = 100000;
    bool strict = true, exact = false, allow_heavy = false, desk = false;

    auto* validate = app.add_subcommand("validate", "check a circuit file");
    validate->add_option("-i,--input", in)->required();

    auto* expand_cmd = app.add_subcommand("expand", "expand a circuit to a polynomial");
    expand_cmd->add_option("-i,--input", in)->required();

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a polynomial or circuit at a point");
    eval_cmd->add_option("-i,--input", in)->required();
    eval_cmd->add_option("--point", point, "comma-separated field elements")->required();

    auto* derive = app.add_subcommand("derive", "build the derivative circuit");
    derive->add_option("-i,--input", in)->required();

    auto* pdm = app.add_subcommand("pdm-rank", "rank of the partial derivative matrix");
    pdm->add_option("-i,--input", in)->required();
    pdm->add_option("--y", yvars, "comma-separated 1-based Y variables")->required();

    auto* leveled_cmd = app.add_subcommand("leveled", "lower/upper leveled gate sets");
    leveled_cmd->add_option("-i,--input", in)->required();
    leveled_cmd->add_option("--k", k)->required();

    auto* dec = app.add_subcommand("decompose", "sum-of-disjoint-products decomposition");
    dec->add_option("-i,--input", in)->required();
    dec->add_option("--k", k)->required();
    dec->add_option("--tau", tau)->required();

    auto* sf = app.add_subcommand("setfam", "set-family constructions and searches");
    sf->require_subcommand(1);
    auto* sfc = sf->add_subcommand("construct", "explicit interval families");
    sfc->add_option("--kind", kind, "galvin | interval");
    sfc->add_option("--g", g, "galvin parameter (universe 4g)");
    sfc->add_option("--n", n);
    sfc->add_option("--tau", tau);
    auto* sfv = sf->add_subcommand("covers", "exhaustive covering check");
    sfv->add_option("-i,--input", in)->required();
    sfv->add_option("--tau", tau)->required();
    sfv->add_flag("--strict,!--no-strict", strict, "d < tau (default) vs d <= tau");
    auto* sfs = sf->add_subcommand("search", "minimal covering family");
    sfs->add_option("--n", n)->required();
    sfs->add_option("--tau", tau);
    sfs->add_option("--size-lo", lo)->required();
    sfs->add_option("--size-hi", hi)->required();
    sfs->add_flag("--exact-balance", exact);
    sfs->add_flag("--strict,!--no-strict", strict);
    auto* sfu = sf->add_subcommand("unbalance", "find a partition unbalancing every set");
    sfu->add_option("-i,--input", in)->required();
    sfu->add_option("--tau", tau)->required();
    sfu->add_option("--mode", mode, "exhaustive | randomized");
    sfu->add_option("--budget", budget);
    auto* sfh = sf->add_subcommand("hypergeom", "exact hypergeometric probabilities");
    sfh->add_option("--M", hM)->required();
    sfh->add_option("--N", hN)->required();
    sfh->add_option("--k", hk)->required();
    sfh->add_option("--i", hi_i);
    sfh->add_option("--t", hi_t);

    auto* pm = app.add_subcommand("polymethod", "finite-field polynomial method");
    pm->require_subcommand(1);
    auto* pmh = pm->add_subcommand("hegedus", "verify the degree lemma by nullspace containment");
    pmh->add_option("--p", p)->required();
    pmh->add_flag("--allow-heavy", allow_heavy, "permit the long p = 5 run");
    auto* pmw = pm->add_subcommand("witness", "run the unbalancing-theorem pipeline");
    pmw->add_option("-i,--input", in)->required();
    pmw->add_option("--tau", tau)->required();
    pmw->add_option("--mode", mode, "special | general")->required();
    pmw->add_flag("--desk", desk, "desk-scale constants preset");

    auto* fr = app.add_subcommand("fullrank", "the explicit full-rank polynomial");
    fr->require_subcommand(1);
    auto* frb = fr->add_subcommand("build", "emit the polynomial (structural or specialized)");
    frb->add_option("--n", n)->required();
    frb->add_option("--omega", omega, "specialize at these auxiliary values");
    frb->add_option("--p", p)->default_val(std::uint64_t{1009});
    auto* frv = fr->add_subcommand("verify", "per-partition rank certification");
    frv->add_option("--n", n)->required();
    frv->add_option("--method", method, "indicator | random");
    frv->add_option("--p", p)->default_val(std::uint64_t{1009});

    auto* pl = app.add_subcommand("pipeline", "end-to-end lower-bound pipeline on a circuit");
    pl->add_option("-i,--input", in)->required();
    pl->add_option("--tau", tau)->required();
    pl->add_option("--k", k)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    set_max_threads(g_opts.threads);

    try {
        if (*validate) return cmd_validate(in);
        if (*expand_cmd) return cmd_expand(in);
        if (*eval_cmd) return cmd_eval(in, point);
        if (*derive) return cmd_derive(in);
        if (*pdm) return cmd_pdm_rank(in, yvars);
        if (*leveled_cmd) return cmd_leveled(in, k);
        if (*dec) return cmd_decompose(in, k, tau);
        if (*sfc) return cmd_setfam_construct(kind, g, n, tau);
        if (*sfv) return cmd_setfam_covers(in, tau, strict);
        if (*sfs) return cmd_setfam_search(n, tau, lo, hi, exact, strict);
        if (*sfu) return cmd_setfam_unbalance(in, tau, mode, budget);
        if (*sfh) return cmd_setfam_hypergeom(hM, hN, hk, hi_i, hi_t);
        if (*pmh) return cmd_hegedus(p, allow_heavy);
        if (*pmw) return cmd_witness(in, tau, mode, desk);
        if (*frb) return cmd_fullrank_build(n, omega, p);
        if (*frv) return cmd_fullrank_verify(n, method, p);
        if (*pl) return cmd_pipeline(in, tau, k);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ResourceError& e) {
        std::cerr << "resource guard: " << e.what() << '\n';
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const InvariantError& e) {
        std::cerr << "internal invariant violated: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "malformed file: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
