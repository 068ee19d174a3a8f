#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "overflow_lab/overflow_lab.hpp"

namespace overflow_lab::cli {

enum class KeyType { string, number, integer, boolean, array };

struct KeySpec {
    std::string name;
    KeyType type;
    std::string help;
};

struct CsvRow {
    std::string x;
    double value;
    std::string method;
};

struct Report {
    Json json;
    std::vector<CsvRow> rows;
};

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Flat key -> value view over the merged config file and command-line flags.
class Params {
public:
    Params(Json values, const std::vector<KeySpec>& keys) : v_(std::move(values)) {
        for (const auto& k : keys) types_[k.name] = k.type;
        for (auto it = v_.begin(); it != v_.end(); ++it)
            if (!types_.count(it.key())) throw ConfigError("unknown key '" + it.key() + "'");
    }

    bool has(const std::string& k) const { return v_.contains(k) && !v_.at(k).is_null(); }

    const Json& raw(const std::string& k) const {
        if (!has(k)) throw ConfigError("missing required key '" + k + "'");
        return v_.at(k);
    }

    std::string str(const std::string& k) const {
        const Json& j = raw(k);
        if (!j.is_string()) throw ConfigError("key '" + k + "' must be a string");
        return j.get<std::string>();
    }
    std::string str(const std::string& k, const std::string& dflt) const { return has(k) ? str(k) : dflt; }

    double number(const std::string& k) const {
        const Json& j = raw(k);
        if (j.is_number()) return j.get<double>();
        if (j.is_string()) {
            const std::string s = j.get<std::string>();
            Rational q;
            try {
                q = parse_rational(s);
            } catch (const ParseError& e) {
                throw ParseError("key '" + k + "': " + e.what(), e.position());
            }
            // strtod rounds to nearest like the JSON reader; mpq_get_d truncates
            if (s.find('/') == std::string::npos) return std::strtod(s.c_str(), nullptr);
            return to_double(q);
        }
        throw ConfigError("key '" + k + "' must be a number");
    }
    double number(const std::string& k, double dflt) const { return has(k) ? number(k) : dflt; }

    long long integer(const std::string& k) const {
        const Json& j = raw(k);
        if (j.is_number_integer()) return j.get<long long>();
        if (j.is_string()) {
            const std::string s = j.get<std::string>();
            std::size_t pos = 0;
            long long v = 0;
            try {
                v = std::stoll(s, &pos);
            } catch (const std::exception&) {
                throw ParseError("key '" + k + "': expected an integer, got '" + s + "'", 0);
            }
            if (pos != s.size()) throw ParseError("key '" + k + "': trailing characters in integer", long(pos));
            return v;
        }
        throw ConfigError("key '" + k + "' must be an integer");
    }
    long long integer(const std::string& k, long long dflt) const { return has(k) ? integer(k) : dflt; }

    std::uint64_t seed(const std::string& k, std::uint64_t dflt) const {
        if (!has(k)) return dflt;
        long long v = integer(k);
        if (v < 0) throw ConfigError("key '" + k + "' must be nonnegative");
        return std::uint64_t(v);
    }

    bool boolean(const std::string& k, bool dflt) const {
        if (!has(k)) return dflt;
        const Json& j = raw(k);
        if (j.is_boolean()) return j.get<bool>();
        if (j.is_string()) {
            if (j == "true") return true;
            if (j == "false") return false;
        }
        throw ConfigError("key '" + k + "' must be true or false");
    }

    Json array(const std::string& k) const {
        const Json& j = raw(k);
        if (j.is_array()) return j;
        if (j.is_string()) {
            try {
                Json parsed = Json::parse(j.get<std::string>());
                if (parsed.is_array()) return parsed;
            } catch (const Json::parse_error& e) {
                throw ParseError("key '" + k + "': " + e.what(), long(e.byte));
            }
        }
        throw ConfigError("key '" + k + "' must be an array");
    }

    std::vector<double> numbers(const std::string& k) const {
        std::vector<double> out;
        Json a = array(k);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].is_number()) {
                out.push_back(a[i].get<double>());
            } else {
                out.push_back(to_double(rational_from_json(a[i], k + "[" + std::to_string(i) + "]")));
            }
        }
        return out;
    }

    // Echoed into reports so a run can be reproduced from its own output.
    const Json& values() const { return v_; }

private:
    Json v_;
    std::map<std::string, KeyType> types_;
};

// ---- shared pieces ----

inline std::vector<KeySpec> quadrature_keys() {
    return {{"grid", KeyType::integer, "base grid N0, a power of two (default 256)"},
            {"tol", KeyType::number, "refinement tolerance (default 1e-6)"},
            {"depth", KeyType::integer, "maximum number of grid doublings (default 9)"}};
}

inline QuadratureSettings quadrature_from(const Params& p) {
    QuadratureSettings s;
    s.grid = std::size_t(p.integer("grid", (long long)s.grid));
    s.tol = p.number("tol", s.tol);
    s.depth = int(p.integer("depth", s.depth));
    s.validate();
    return s;
}

inline Json settings_json(const QuadratureSettings& s) {
    return Json{{"grid", s.grid}, {"tol", s.tol}, {"depth", s.depth}, {"offset", s.offset}};
}

inline Json report_json(const OverflowReport& r) {
    Json j;
    j["value"] = r.value;
    j["method"] = r.method;
    j["target"] = r.target;
    j["radius"] = r.radius;
    j["tolerance"] = r.tolerance;
    j["grid"] = r.grid;
    j["root_conditioning"] = r.root_conditioning;
    j["parts"] = Json::object();
    for (const auto& [k, v] : r.parts) j["parts"][k] = v;
    if (r.residual) j["residual"] = *r.residual;
    return j;
}

inline Json parts_json(const std::map<std::string, double>& parts) {
    Json j = Json::object();
    for (const auto& [k, v] : parts) j[k] = v;
    return j;
}

inline std::vector<KeySpec> morphism_keys() {
    return {{"psi", KeyType::array, "series literal for psi, e.g. [\"0\",\"1/3\"]"},
            {"radius", KeyType::number, "disk radius (default 1)"},
            {"map", KeyType::string, "alpha_an as an expression in z"},
            {"order", KeyType::integer, "certification order N (default: length of psi - 1)"},
            {"target", KeyType::string, "A1 or P1 (default A1)"}};
}

inline MorphismToLine morphism_from(const Params& p) {
    RationalSeries psi = series_from_json(p.array("psi"), "psi");
    SurfaceDescriptor desc(p.number("radius", 1.0), psi);
    long long order = p.integer("order", (long long)psi.order());
    if (order < 1) throw ConfigError("key 'order' must be at least 1");
    DiskMap a = parse_map(p.str("map"));
    std::string target = p.str("target", "A1");
    if (target == "A1") return build_morphism(desc, a, std::size_t(order));
    if (target == "P1") return build_morphism_P1(desc, a, std::size_t(order));
    throw ConfigError("key 'target' must be A1 or P1");
}

inline Json morphism_json(const MorphismToLine& m) {
    Json j;
    j["target"] = m.target == LineTarget::A1 ? "A1" : "P1";
    j["e"] = m.e;
    j["certified_order"] = m.certified_order;
    j["integral"] = true;
    j["radius"] = m.surface.radius;
    j["psi"] = series_to_json(m.surface.psi);
    j["normal_degree"] = m.surface.normal_degree();
    j["pseudoconcave"] = m.surface.pseudoconcave();
    if (m.target == LineTarget::A1) {
        j["alpha_hat"] = series_to_json(m.alpha_hat);
    } else {
        j["hom_A"] = series_to_json(m.hom_A);
        j["hom_B"] = series_to_json(m.hom_B);
        j["alpha0"] = Json::array({m.x0.get_str(), m.x1.get_str()});
    }
    return j;
}

inline Json integer_json(const Integer& z) {
    if (z.fits_slong_p()) return (long long)z.get_si();
    return z.get_str();
}

inline std::vector<KeySpec> with(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// ---- commands ----

inline Report cmd_overflow(const Params& p) {
    DiskMap a = parse_map(p.str("map"));
    QuadratureSettings s = quadrature_from(p);
    std::string target = p.str("target", "C");
    std::string method = p.str("method", "explicit");
    if (target != "C" && target != "P1") throw ConfigError("key 'target' must be C or P1");
    if (method != "explicit" && method != "oracle" && method != "both")
        throw ConfigError("key 'method' must be explicit, oracle or both");
    OracleOptions opt;
    opt.degree_bound = int(p.integer("degree_bound", opt.degree_bound));
    opt.strict = p.boolean("strict", false);

    auto one = [&](double r, std::vector<CsvRow>& rows) {
        Json out;
        std::optional<OverflowReport> ex, orc;
        if (method != "oracle") ex = target == "C" ? overflow_to_C(a, r, s) : overflow_to_P1(a, r, s);
        // For polynomial maps the C and P1 overflows coincide, so the root oracle serves both targets.
        if (method != "explicit") {
            orc = overflow_definitional_oracle(a, r, s, opt);
            orc->target = target;
        }
        if (ex && orc) {
            double res = std::fabs(ex->value - orc->value);
            ex->residual = res;
            orc->residual = res;
        }
        const OverflowReport& main = ex ? *ex : *orc;
        out = report_json(main);
        out["method"] = method == "both" ? "both" : main.method;
        out["reports"] = Json::object();
        if (ex) {
            out["reports"]["explicit"] = report_json(*ex);
            rows.push_back({fmt17(r), ex->value, "explicit"});
        }
        if (orc) {
            out["reports"]["definitional"] = report_json(*orc);
            out["root_conditioning"] = orc->root_conditioning;
            rows.push_back({fmt17(r), orc->value, "definitional"});
        }
        return std::make_pair(out, ex ? ex->value : orc->value);
    };

    Report rep;
    if (p.has("radii")) {
        std::vector<double> radii = p.numbers("radii");
        Json sweep = Json::array();
        std::vector<double> vals;
        for (double r : radii) {
            auto [j, v] = one(r, rep.rows);
            sweep.push_back(j);
            vals.push_back(v);
        }
        rep.json["sweep"] = sweep;
        if (radii.size() >= 2) {
            AsymptoticFit fit = fit_log_radius(radii, vals);
            rep.json["fit"] = Json{{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
        }
    } else {
        auto [j, v] = one(p.number("radius", 1.0), rep.rows);
        (void)v;
        rep.json = j;
    }
    rep.json["map"] = p.str("map");
    rep.json["settings"] = settings_json(s);
    return rep;
}

inline Report cmd_selfint(const Params& p) {
    MorphismToLine m = morphism_from(p);
    QuadratureSettings s = quadrature_from(p);
    Report rep;
    Json& j = rep.json;
    j["morphism"] = morphism_json(m);
    j["settings"] = settings_json(s);
    if (m.target == LineTarget::P1) {
        SelfIntersection si = self_intersection_P1(m, s);
        j["method"] = "P1";
        j["value"] = si.value;
        j["parts"] = parts_json(si.parts);
        j["upper_bound"] = *si.upper_bound;
        j["residual"] = *si.residual;
        for (const auto& [k, v] : si.parts) rep.rows.push_back({k, v, "P1"});
        rep.rows.push_back({"value", si.value, "P1"});
        return rep;
    }
    std::string method = p.str("method", "both");
    if (method != "decomposition" && method != "oracle" && method != "both")
        throw ConfigError("key 'method' must be decomposition, oracle or both");
    DirectOracleOptions opt;
    opt.roots.degree_bound = int(p.integer("degree_bound", opt.roots.degree_bound));
    j["method"] = method;
    std::optional<SelfIntersection> dec, orc;
    if (method != "oracle") {
        dec = self_intersection_A1(m, s);
        j["decomposition"] = Json{{"value", dec->value}, {"parts", parts_json(dec->parts)}};
        // twice the torus integral, kept beside the accepted value
        j["disputed_doubled"] = *dec->disputed_doubled;
        for (const auto& [k, v] : dec->parts) rep.rows.push_back({k, v, "decomposition"});
        rep.rows.push_back({"value", dec->value, "decomposition"});
        rep.rows.push_back({"value", *dec->disputed_doubled, "disputed_doubled"});
    }
    if (method != "decomposition") {
        orc = self_intersection_direct_oracle(m, s, opt);
        j["direct_oracle"] = Json{{"value", orc->value}, {"parts", parts_json(orc->parts)}};
        rep.rows.push_back({"value", orc->value, "direct_oracle"});
    }
    j["value"] = dec ? dec->value : orc->value;
    if (dec && orc) j["residual"] = std::fabs(dec->value - orc->value);
    return rep;
}

inline Report cmd_dinv(const Params& p) {
    MorphismToLine m = morphism_from(p);
    QuadratureSettings s = quadrature_from(p);
    DInvariant d = D_invariant(m, s);
    Report rep;
    rep.json["morphism"] = morphism_json(m);
    rep.json["settings"] = settings_json(s);
    rep.json["value"] = d.value;
    rep.json["e"] = d.e;
    rep.json["parts"] = Json{{"normal_degree", d.normal_degree},
                             {"finite_excess", d.finite_excess},
                             {"archimedean_excess", d.archimedean_excess}};
    rep.rows = {{"D", d.value, "decomposition"},
                {"normal_degree", d.normal_degree, "decomposition"},
                {"finite_excess", d.finite_excess, "decomposition"},
                {"archimedean_excess", d.archimedean_excess, "decomposition"}};
    return rep;
}

inline Report cmd_holonomy(const Params& p) {
    MorphismToLine m = morphism_from(p);
    QuadratureSettings s = quadrature_from(p);
    HolonomyBound h = holonomy_degree_bound(m, s);
    Report rep;
    rep.json["morphism"] = morphism_json(m);
    rep.json["settings"] = settings_json(s);
    rep.json["bound"] = h.bound;
    rep.json["D"] = h.D;
    rep.json["cdt_bound"] = h.cdt_bound;
    rep.json["floor_slack"] = holonomy_floor_slack;
    rep.rows = {{"bound", double(h.bound), "floor_D"}, {"D", h.D, "decomposition"}, {"cdt", h.cdt_bound, "cdt"}};
    return rep;
}

inline Report cmd_dimbound(const Params& p) {
    std::string kind = p.str("kind", "C");
    long long n = p.integer("n");
    Report rep;
    rep.json["kind"] = kind;
    rep.json["n"] = n;
    Integer count;
    if (kind == "C") {
        long long d = p.integer("d");
        count = dim_bound_C(long(n), long(d));
        rep.json["d"] = d;
        if (n > 0) rep.json["asymptotic_ratio"] = count.get_d() * 2.0 * double(d) / (double(n) * double(n));
    } else if (kind == "CNB") {
        Rational cd = rational_from_json(p.raw("cd"), "cd");
        long long mu = p.integer("mu");
        count = dim_bound_CNB(long(n), cd, long(mu));
        rep.json["cd"] = to_string(cd);
        rep.json["mu"] = mu;
        if (n > 0)
            rep.json["asymptotic_ratio"] = count.get_d() * 2.0 * double(mu) * to_double(cd) / (double(n) * double(n));
    } else {
        throw ConfigError("key 'kind' must be C or CNB");
    }
    rep.json["count"] = integer_json(count);
    rep.rows = {{std::to_string(n), count.get_d(), kind}};
    return rep;
}

inline Report cmd_grelem(const Params& p) {
    RationalSeries psi = series_from_json(p.array("psi"), "psi");
    long long e = p.integer("e", 1);
    long long order = p.integer("order", (long long)psi.order());
    if (e < 1 || order < e) throw ConfigError("need 1 <= e <= order");
    GrelemResult g = grelem_construct(psi, int(e), std::size_t(order));
    Report rep;
    Json& j = rep.json;
    j["alpha_hat"] = series_to_json(g.alpha_hat);
    j["composed"] = series_to_json(g.composed);
    j["lambda"] = to_string(g.lambda);
    j["e"] = g.e;
    j["order"] = g.order;
    j["certificate"] = g.certificate;
    j["convergent"] = g.convergent;
    double sup = grelem_sup_norm(g);
    j["sup_norm_sampled"] = sup;
    if (g.sup_bound) j["sup_bound"] = *g.sup_bound;
    for (std::size_t n = 0; n <= g.order; ++n)
        rep.rows.push_back({std::to_string(n), to_double(g.alpha_hat[n]), "alpha_hat"});
    return rep;
}

inline Json equilibrium_json(const IntersectionLattice& L, const EquilibriumDivisor& eq) {
    Json j;
    j["v"] = rational_array_json(eq.v);
    j["DD"] = to_string(eq.DD);
    j["effective"] = eq.effective;
    bool zero = true;
    for (const auto& x : equilibrium_residual(L, eq.v))
        if (sgn(x) != 0) zero = false;
    j["residual_zero"] = zero;
    CNBReport c = is_CNB(L, eq.v);
    j["cnb"] = Json{{"cnb", c.cnb}, {"witness_DD", to_string(c.DD)}, {"CD", to_string(c.CD)}};
    return j;
}

inline std::vector<CsvRow> equilibrium_rows(const IntersectionLattice& L, const EquilibriumDivisor& eq) {
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < eq.v.size(); ++i)
        rows.push_back({L.labels.empty() ? std::to_string(i) : L.labels[i], to_double(eq.v[i]), "equilibrium"});
    rows.push_back({"DD", to_double(eq.DD), "equilibrium"});
    return rows;
}

inline Report cmd_equilibrium(const Params& p) {
    std::string path = p.str("lattice");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lattice file '" + path + "'");
    Json lj;
    try {
        lj = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError("lattice file: " + std::string(e.what()), long(e.byte));
    }
    IntersectionLattice L = lattice_from_json(lj);
    EquilibriumDivisor eq = equilibrium_divisor(L);
    Report rep;
    rep.json = equilibrium_json(L, eq);
    rep.json["lattice"] = lattice_to_json(L);
    if (p.has("candidate")) {
        Json cj = p.array("candidate");
        RationalVector cand;
        for (std::size_t i = 0; i < cj.size(); ++i)
            cand.push_back(rational_from_json(cj[i], "candidate[" + std::to_string(i) + "]"));
        DenoughReport d = denough_compare(L, eq.v, cand);
        rep.json["denough"] = Json{{"delta", rational_array_json(d.delta)},
                                   {"V_dominates", d.V_dominates},
                                   {"CD_eq", to_string(d.CD_eq)},
                                   {"CD_candidate", to_string(d.CD_candidate)},
                                   {"DD_eq", to_string(d.DD_eq)},
                                   {"DD_candidate", to_string(d.DD_candidate)},
                                   {"gap", to_string(d.gap)},
                                   {"delta_square", to_string(d.delta_square)},
                                   {"equal", d.equal}};
    }
    rep.rows = equilibrium_rows(L, eq);
    return rep;
}

inline Report cmd_blowup(const Params& p) {
    long long n = p.integer("n");
    Rational cc = p.has("cc") ? rational_from_json(p.raw("cc"), "cc") : Rational(0);
    IntersectionLattice L = blowup_chain_fixture(long(n), cc);
    EquilibriumDivisor eq = equilibrium_divisor(L);
    Report rep;
    rep.json = equilibrium_json(L, eq);
    rep.json["lattice"] = lattice_to_json(L);
    rep.json["n"] = n;
    rep.rows = equilibrium_rows(L, eq);
    return rep;
}

inline Report cmd_sample(const Params& p) {
    long long n = p.integer("n");
    long long count = p.integer("count", 1);
    std::uint64_t seed = p.seed("seed", 0);
    if (n < 1 || count < 1) throw ConfigError("keys 'n' and 'count' must be positive");
    auto rng = seeded_engine(seed);
    Report rep;
    Json samples = Json::array();
    for (long long k = 0; k < count; ++k) {
        TruncatedDiffeo<double> g = haar_sample(std::size_t(n), rng);
        samples.push_back(g.coefficients());
        for (std::size_t i = 0; i < g.coefficients().size(); ++i)
            rep.rows.push_back({std::to_string(k) + ":" + std::to_string(i + 2), g.coefficients()[i], "haar"});
    }
    rep.json["samples"] = samples;
    rep.json["n"] = n;
    rep.json["seed"] = seed;
    rep.json["shards"] = 1;
    return rep;
}

inline Report cmd_jacobian(const Params& p) {
    long long e = p.integer("e"), n = p.integer("n");
    double a = p.number("a");
    double h = p.number("step", 1e-3);
    long long points = p.integer("points", 10);
    std::uint64_t seed = p.seed("seed", 0);
    if (e < 1 || n < 0 || points < 1) throw ConfigError("need e >= 1, n >= 0, points >= 1");
    auto rng = seeded_engine(seed);
    Report rep;
    Json pts = Json::array();
    double worst = 0.0, lo = INFINITY, hi = -INFINITY, expected = 1.0;
    for (long long k = 0; k < points; ++k) {
        std::vector<double> trailing(static_cast<std::size_t>(n));
        for (auto& c : trailing) c = 2.0 * uniform01(rng) - 1.0;
        TruncatedDiffeo<double> g(static_cast<std::size_t>(n));
        for (std::size_t i = 2; i <= std::size_t(n) + 1; ++i) g.coeff(i) = uniform01(rng);
        auto phi = OrbitElement<double>::make(int(e), a, trailing);
        JacobianReport jr = jacobian_check(phi, g, h);
        expected = jr.expected;
        worst = std::max(worst, jr.relative_error);
        lo = std::min(lo, jr.determinant);
        hi = std::max(hi, jr.determinant);
        pts.push_back(Json{{"determinant", jr.determinant},
                           {"determinant_half_step", jr.determinant_half_step},
                           {"relative_error", jr.relative_error}});
        rep.rows.push_back({std::to_string(k), jr.determinant, "central_difference"});
    }
    rep.json["points"] = pts;
    rep.json["expected"] = expected;
    rep.json["max_relative_error"] = worst;
    rep.json["relative_spread"] = (hi - lo) / std::fabs(expected);
    rep.json["seed"] = seed;
    rep.json["shards"] = 1;
    rep.json["step"] = h;
    return rep;
}

inline Report cmd_measure(const Params& p) {
    MeasureParams mp;
    mp.e = int(p.integer("e", mp.e));
    mp.a = long(p.integer("a", mp.a));
    mp.rho = p.number("rho", mp.rho);
    mp.R = p.number("R", mp.R);
    long long n = p.integer("n", (long long)mp.n);
    long long samples = p.integer("samples", (long long)mp.samples);
    long long shards = p.integer("shards", (long long)mp.shards);
    if (n < 1 || samples < 1 || shards < 1) throw ConfigError("keys 'n', 'samples' and 'shards' must be positive");
    mp.n = std::size_t(n);
    mp.samples = std::size_t(samples);
    mp.shards = std::size_t(shards);
    mp.seed = p.seed("seed", 0);
    MeasureReport m = measure_bound_mc(mp);
    Report rep;
    Json& j = rep.json;
    j["estimate"] = m.estimate;
    j["stderr"] = m.stderr_;
    j["hits"] = m.hits;
    j["samples"] = m.samples;
    j["stated_bound"] = m.stated_bound;
    j["product_bound"] = m.product_bound;
    j["within_stated_bound"] = m.estimate <= m.stated_bound + 3.0 * m.stderr_;
    j["informative"] = m.informative;
    j["enumeration_size"] = m.enumeration_size;
    j["seed"] = m.seed;
    j["shards"] = m.shards;
    j["params"] = Json{{"e", mp.e}, {"a", mp.a}, {"rho", mp.rho}, {"R", mp.R}, {"n", mp.n}};
    rep.rows = {{fmt17(mp.rho), m.estimate, "monte_carlo"},
                {fmt17(mp.rho), m.stated_bound, "stated_bound"},
                {fmt17(mp.rho), m.product_bound, "product_bound"}};
    return rep;
}

struct Command {
    std::string name;
    std::string help;
    std::vector<KeySpec> keys;
    std::function<Report(const Params&)> run;
};

inline const std::vector<Command>& commands() {
    static const std::vector<Command> list = [] {
        std::vector<Command> c;
        c.push_back({"overflow", "Archimedean overflow of a disk map to C or P1",
                     with({{"map", KeyType::string, "map expression in z, e.g. z^3+z"},
                           {"radius", KeyType::number, "disk radius (default 1)"},
                           {"radii", KeyType::array, "radius sweep, e.g. [10,100,1000]; adds a log-radius fit"},
                           {"target", KeyType::string, "C or P1 (default C)"},
                           {"method", KeyType::string, "explicit, oracle or both (default explicit)"},
                           {"degree_bound", KeyType::integer, "largest degree accepted by the oracle (default 8)"},
                           {"strict", KeyType::boolean, "treat boundary-tangent roots as an error"}},
                          quadrature_keys()),
                     cmd_overflow});
        c.push_back({"selfint", "self-intersection of the pushed-forward equilibrium divisor",
                     with(with(morphism_keys(), quadrature_keys()),
                          {{"method", KeyType::string, "decomposition, oracle or both (default both)"},
                           {"degree_bound", KeyType::integer, "largest degree accepted by the oracle (default 8)"}}),
                     cmd_selfint});
        c.push_back({"dinv", "the invariant D(alpha)", with(morphism_keys(), quadrature_keys()), cmd_dinv});
        c.push_back({"holonomy-bound", "floor of D(alpha) next to the CDT-style bound",
                     with(morphism_keys(), quadrature_keys()), cmd_holonomy});
        c.push_back({"dimbound", "dimension counters C(n)",
                     {{"kind", KeyType::string, "C or CNB (default C)"},
                      {"n", KeyType::integer, "n"},
                      {"d", KeyType::integer, "normal degree d (kind C)"},
                      {"cd", KeyType::string, "C.D as a rational (kind CNB)"},
                      {"mu", KeyType::integer, "mu (kind CNB)"}},
                     cmd_dimbound});
        c.push_back({"grelem", "greedy integral series with geometric decay after composing with psi^-1",
                     {{"psi", KeyType::array, "series literal for psi"},
                      {"e", KeyType::integer, "leading exponent (default 1)"},
                      {"order", KeyType::integer, "order N (default: length of psi - 1)"}},
                     cmd_grelem});
        c.push_back({"equilibrium", "equilibrium divisor of an intersection lattice",
                     {{"lattice", KeyType::string, "path to a lattice JSON file {labels, matrix, c, cc}"},
                      {"candidate", KeyType::array, "candidate coefficients for the Denough comparison"}},
                     cmd_equilibrium});
        c.push_back({"blowup-chain", "equilibrium data of the blow-up chain fixture",
                     {{"n", KeyType::integer, "chain length"}, {"cc", KeyType::string, "C.C as a rational (default 0)"}},
                     cmd_blowup});
        c.push_back({"sample-diffeo", "Haar samples of D_n(R)/D_n(Z)",
                     {{"n", KeyType::integer, "level"},
                      {"count", KeyType::integer, "number of samples (default 1)"},
                      {"seed", KeyType::integer, "seed (default 0)"}},
                     cmd_sample});
        c.push_back({"jacobian-check", "finite-difference Jacobian of g -> phi o g against (e a)^n",
                     {{"e", KeyType::integer, "e"},
                      {"a", KeyType::number, "a"},
                      {"n", KeyType::integer, "level, at most 6"},
                      {"step", KeyType::number, "difference step h (default 1e-3)"},
                      {"points", KeyType::integer, "number of random sample points (default 10)"},
                      {"seed", KeyType::integer, "seed (default 0)"}},
                     cmd_jacobian});
        c.push_back({"measure-mc", "Monte Carlo estimate of the measure bound",
                     {{"e", KeyType::integer, "e (default 1)"},
                      {"a", KeyType::integer, "a (default 1)"},
                      {"rho", KeyType::number, "rho (default 2)"},
                      {"R", KeyType::number, "R (default 1)"},
                      {"n", KeyType::integer, "level, at most 4 (default 3)"},
                      {"samples", KeyType::integer, "sample count (default 100000)"},
                      {"shards", KeyType::integer, "sample shards, each with its own stream (default 8)"},
                      {"seed", KeyType::integer, "seed (default 0)"}},
                     cmd_measure});
        return c;
    }();
    return list;
}

inline const Command& find_command(const std::string& name) {
    for (const auto& c : commands())
        if (c.name == name) return c;
    throw ConfigError("unknown command '" + name + "'");
}

inline Json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError("config file: " + std::string(e.what()), long(e.byte));
    }
    if (!j.is_object()) throw ConfigError("config file must hold a flat JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.value().is_object()) throw ConfigError("config key '" + it.key() + "' is nested; the format is flat");
    return j;
}

inline std::string render_csv(const std::vector<CsvRow>& rows) {
    std::string out = "x,value,method\n";
    for (const auto& r : rows) out += r.x + "," + fmt17(r.value) + "," + r.method + "\n";
    return out;
}

inline Json error_json(const std::string& kind, const std::string& message, std::optional<long> position) {
    Json e{{"kind", kind}, {"message", message}};
    e["position"] = position ? Json(*position) : Json(nullptr);
    return Json{{"error", e}};
}

// Runs one invocation; returns the exit status (0 ok, 2 domain or usage error, 3 numerical failure).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"overflow-lab: overflow, self-intersection and lattice computations"};
    app.require_subcommand(1);
    struct Bound {
        const Command* cmd;
        CLI::App* sub;
        std::map<std::string, std::string> flags;
        std::string config, format = "json", output;
    };
    std::vector<Bound> bound;
    bound.reserve(commands().size() + 1);
    for (const auto& c : commands()) {
        bound.push_back({&c, nullptr, {}, {}, "json", {}});
        Bound& b = bound.back();
        b.sub = app.add_subcommand(c.name, c.help);
        for (const auto& k : c.keys) b.sub->add_option("--" + k.name, b.flags[k.name], k.help);
        b.sub->add_option("--config", b.config, "flat JSON config; flags override its keys");
        b.sub->add_option("--format", b.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        b.sub->add_option("--output", b.output, "write the report here instead of stdout");
    }
    std::string run_config, run_format = "json", run_output;
    CLI::App* run_sub = app.add_subcommand("run", "execute the command named by the config key 'command'");
    run_sub->add_option("--config", run_config, "flat JSON config with a 'command' key")->required();
    run_sub->add_option("--format", run_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    run_sub->add_option("--output", run_output, "write the report here instead of stdout");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        out << to_stable_json(error_json("UsageError", e.what(), std::nullopt));
        return 2;
    }

    try {
        const Command* cmd = nullptr;
        Json values = Json::object();
        std::string format, output;
        if (run_sub->parsed()) {
            values = load_config(run_config);
            if (!values.contains("command") || !values["command"].is_string())
                throw ConfigError("config needs a string key 'command'");
            cmd = &find_command(values["command"].get<std::string>());
            values.erase("command");
            format = run_format;
            output = run_output;
        } else {
            for (auto& b : bound) {
                if (!b.sub->parsed()) continue;
                cmd = b.cmd;
                if (!b.config.empty()) {
                    values = load_config(b.config);
                    if (values.contains("command")) {
                        if (values["command"] != cmd->name)
                            throw ConfigError("config 'command' does not match the subcommand");
                        values.erase("command");
                    }
                }
                for (const auto& k : cmd->keys)
                    if (b.sub->count("--" + k.name) > 0) values[k.name] = b.flags[k.name];
                format = b.format;
                output = b.output;
            }
        }
        Params params(values, cmd->keys);
        Report rep = cmd->run(params);
        rep.json["command"] = cmd->name;
        rep.json["config"] = params.values();
        std::string text = format == "csv" ? render_csv(rep.rows) : to_stable_json(rep.json);
        if (output.empty()) {
            out << text;
        } else {
            std::ofstream f(output, std::ios::binary);
            if (!f) throw ConfigError("cannot write '" + output + "'");
            f << text;
        }
        return 0;
    } catch (const Error& e) {
        out << to_stable_json(error_json(e.kind(), e.what(), e.position()));
        return e.error_class() == ErrorClass::numerical ? 3 : 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        out << to_stable_json(error_json("InternalError", e.what(), std::nullopt));
        return 1;
    }
}

}  // namespace overflow_lab::cli
