#include "bohmrelax/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bohmrelax/random.hpp"
#include "json.hpp"

namespace bohmrelax {

using nlohmann::json;

namespace {

/// Collects violations while walking the document so one ConfigError can
/// report all of them.
class Reader {
public:
    void fail(const std::string& field, const std::string& message) {
        errors_.push_back(field + ": " + message);
    }
    bool ok() const { return errors_.empty(); }
    const std::vector<std::string>& errors() const { return errors_; }

    bool object(const json& j, const std::string& field, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            fail(field, "expected an object");
            return false;
        }
        for (const auto& [key, value] : j.items()) {
            bool known = false;
            for (const char* a : allowed) {
                known = known || key == a;
            }
            if (!known) {
                fail(join(field, key), "unknown key");
            }
        }
        return true;
    }

    template <class T>
    std::optional<T> get(const json& j, const std::string& parent, const char* key, bool required) {
        const std::string field = join(parent, key);
        if (!j.contains(key)) {
            if (required) {
                fail(field, "missing");
            }
            return std::nullopt;
        }
        const json& v = j.at(key);
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) {
                fail(field, "expected a number");
                return std::nullopt;
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                fail(field, "expected an integer");
                return std::nullopt;
            }
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_integer() && !v.is_number_unsigned()) {
                    fail(field, "expected a non-negative integer");
                    return std::nullopt;
                }
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                fail(field, "expected a string");
                return std::nullopt;
            }
        }
        return v.get<T>();
    }

    static std::string join(const std::string& parent, const std::string& key) {
        return parent.empty() ? key : parent + "." + key;
    }

private:
    std::vector<std::string> errors_;
};

std::optional<QuantumNumbers> read_quantum(Reader& r, const json& j, const std::string& field,
                                           int dimension) {
    if (!j.is_array() || static_cast<int>(j.size()) != dimension) {
        r.fail(field, "expected " + std::to_string(dimension) + " integer quantum numbers");
        return std::nullopt;
    }
    QuantumNumbers n{0, 0};
    for (int i = 0; i < dimension; ++i) {
        const json& v = j.at(static_cast<std::size_t>(i));
        if (!v.is_number_integer()) {
            r.fail(field, "quantum numbers must be integers");
            return std::nullopt;
        }
        n[static_cast<std::size_t>(i)] = v.get<int>();
    }
    return n;
}

bool quantum_valid(Reader& r, const QuantumNumbers& n, const DomainSpec& domain,
                   const std::string& field) {
    for (int axis = 0; axis < domain.dimension(); ++axis) {
        const int v = n[static_cast<std::size_t>(axis)];
        if (domain.kind() == DomainKind::Box && v < 1) {
            r.fail(field, "box quantum numbers must be >= 1");
            return false;
        }
        if (std::abs(v) > kMaxQuantumNumber) {
            r.fail(field, "quantum number exceeds " + std::to_string(kMaxQuantumNumber));
            return false;
        }
    }
    return true;
}

std::optional<DomainSpec> read_domain(Reader& r, const json& j) {
    const std::string field = "wave.domain";
    if (!r.object(j, field, {"kind", "dimension", "lengths"})) {
        return std::nullopt;
    }
    const auto kind_name = r.get<std::string>(j, field, "kind", true);
    const auto dimension = r.get<int>(j, field, "dimension", true);
    if (!kind_name || !dimension) {
        return std::nullopt;
    }
    DomainKind kind;
    if (*kind_name == "box") {
        kind = DomainKind::Box;
    } else if (*kind_name == "torus") {
        kind = DomainKind::Torus;
    } else {
        r.fail(field + ".kind", "expected \"box\" or \"torus\"");
        return std::nullopt;
    }
    if (*dimension != 1 && *dimension != 2) {
        r.fail(field + ".dimension", "must be 1 or 2");
        return std::nullopt;
    }
    if (!j.contains("lengths")) {
        return DomainSpec::standard(kind, *dimension);
    }
    const json& lj = j.at("lengths");
    if (!lj.is_array() || static_cast<int>(lj.size()) != *dimension) {
        r.fail(field + ".lengths", "expected one length per dimension");
        return std::nullopt;
    }
    std::array<double, 2> lengths{0.0, 0.0};
    for (int i = 0; i < *dimension; ++i) {
        const json& v = lj.at(static_cast<std::size_t>(i));
        if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>())) {
            r.fail(field + ".lengths", "lengths must be finite and positive");
            return std::nullopt;
        }
        lengths[static_cast<std::size_t>(i)] = v.get<double>();
    }
    return DomainSpec(kind, *dimension, lengths);
}

void read_wave(Reader& r, const json& j, ExperimentConfig& cfg, bool& domain_ok) {
    const std::string field = "wave";
    domain_ok = false;
    if (!r.object(j, field, {"domain", "modes", "random_phases"})) {
        return;
    }
    if (!j.contains("domain")) {
        r.fail("wave.domain", "missing");
        return;
    }
    const auto domain = read_domain(r, j.at("domain"));
    if (!domain) {
        return;
    }
    cfg.domain = *domain;
    domain_ok = true;
    const int d = domain->dimension();

    const bool explicit_modes = j.contains("modes");
    const bool random = j.contains("random_phases");
    if (explicit_modes == random) {
        r.fail(field, "exactly one of \"modes\" or \"random_phases\" is required");
        return;
    }

    std::vector<ModeSpec> modes;
    std::set<QuantumNumbers> seen;
    auto add_mode = [&](const QuantumNumbers& n, Complex c, const std::string& where) {
        if (!quantum_valid(r, n, *domain, where)) {
            return;
        }
        if (!seen.insert(n).second) {
            r.fail(where, "duplicate mode");
            return;
        }
        modes.push_back({n, c});
    };

    if (explicit_modes) {
        const json& mj = j.at("modes");
        if (!mj.is_array()) {
            r.fail("wave.modes", "expected an array");
            return;
        }
        for (std::size_t i = 0; i < mj.size(); ++i) {
            const std::string where = "wave.modes[" + std::to_string(i) + "]";
            const json& m = mj.at(i);
            if (!r.object(m, where, {"n", "re", "im"})) {
                continue;
            }
            if (!m.contains("n")) {
                r.fail(where + ".n", "missing");
                continue;
            }
            const auto n = read_quantum(r, m.at("n"), where + ".n", d);
            const auto re = r.get<double>(m, where, "re", false).value_or(0.0);
            const auto im = r.get<double>(m, where, "im", false).value_or(0.0);
            if (!std::isfinite(re) || !std::isfinite(im)) {
                r.fail(where, "coefficient must be finite");
                continue;
            }
            if (n) {
                add_mode(*n, Complex(re, im), where);
            }
        }
    } else {
        const std::string where = "wave.random_phases";
        const json& rp = j.at("random_phases");
        if (!r.object(rp, where, {"seed", "modes", "max_quantum"})) {
            return;
        }
        PhaseProvenance prov;
        prov.seed = r.get<std::uint64_t>(rp, where, "seed", true).value_or(0);
        std::vector<QuantumNumbers> set;
        if (rp.contains("modes") == rp.contains("max_quantum")) {
            r.fail(where, "exactly one of \"modes\" or \"max_quantum\" is required");
            return;
        }
        if (rp.contains("modes")) {
            const json& list = rp.at("modes");
            if (!list.is_array()) {
                r.fail(where + ".modes", "expected an array");
                return;
            }
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (auto n = read_quantum(r, list.at(i), where + ".modes[" + std::to_string(i) + "]", d)) {
                    set.push_back(*n);
                }
            }
        } else {
            const auto max = r.get<int>(rp, where, "max_quantum", true);
            if (!max) {
                return;
            }
            if (*max < 1 || *max > kMaxQuantumNumber) {
                r.fail(where + ".max_quantum", "must be in [1, " + std::to_string(kMaxQuantumNumber) + "]");
                return;
            }
            const int lo = domain->kind() == DomainKind::Box ? 1 : -*max;
            for (int a = lo; a <= *max; ++a) {
                if (d == 1) {
                    set.push_back({a, 0});
                    continue;
                }
                for (int b = lo; b <= *max; ++b) {
                    set.push_back({a, b});
                }
            }
        }
        auto engine = std::mt19937_64(prov.seed);
        const double amp = set.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(set.size()));
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double theta = 2.0 * kPi * uniform01(engine);
            add_mode(set[i], std::polar(amp, theta), where + ".modes[" + std::to_string(i) + "]");
        }
        prov.modes = set;
        cfg.phases = prov;
    }

    double norm2 = 0.0;
    for (const auto& m : modes) {
        norm2 += std::norm(m.coefficient);
    }
    if (!(norm2 > 0.0)) {
        r.fail(field, "empty wave (sum of |c|^2 is zero)");
        return;
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto& m : modes) {
        m.coefficient *= scale;
    }
    // Drop exactly-zero modes only after normalization bookkeeping; they
    // carry no weight but would still count toward the index tables.
    std::erase_if(modes, [](const ModeSpec& m) { return m.coefficient == Complex{}; });
    cfg.modes = std::move(modes);
}

std::optional<DensitySpec> read_density(Reader& r, const json& j, const std::string& field,
                                        const DomainSpec& domain) {
    if (!r.object(j, field, {"kind", "n", "components"})) {
        return std::nullopt;
    }
    const auto kind = r.get<std::string>(j, field, "kind", true);
    if (!kind) {
        return std::nullopt;
    }
    if (*kind == "uniform") {
        return DensitySpec::uniform();
    }
    if (*kind == "mode_born") {
        if (!j.contains("n")) {
            r.fail(field + ".n", "missing");
            return std::nullopt;
        }
        const auto n = read_quantum(r, j.at("n"), field + ".n", domain.dimension());
        if (!n || !quantum_valid(r, *n, domain, field + ".n")) {
            return std::nullopt;
        }
        return DensitySpec::mode_born(*n);
    }
    if (*kind == "mixture") {
        if (!j.contains("components") || !j.at("components").is_array() ||
            j.at("components").empty()) {
            r.fail(field + ".components", "expected a non-empty array");
            return std::nullopt;
        }
        std::vector<DensitySpec::Component> parts;
        double total = 0.0;
        const json& cj = j.at("components");
        for (std::size_t i = 0; i < cj.size(); ++i) {
            const std::string where = field + ".components[" + std::to_string(i) + "]";
            const json& c = cj.at(i);
            if (!r.object(c, where, {"weight", "density"})) {
                continue;
            }
            const auto w = r.get<double>(c, where, "weight", true);
            if (!c.contains("density")) {
                r.fail(where + ".density", "missing");
                continue;
            }
            auto inner = read_density(r, c.at("density"), where + ".density", domain);
            if (!w || !inner) {
                continue;
            }
            if (!(*w >= 0.0)) {
                r.fail(where + ".weight", "must be non-negative");
                continue;
            }
            total += *w;
            parts.push_back({*w, std::move(*inner)});
        }
        if (parts.size() != cj.size()) {
            return std::nullopt;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            r.fail(field + ".components", "weights must sum to 1");
            return std::nullopt;
        }
        return DensitySpec::mixture(std::move(parts));
    }
    r.fail(field + ".kind", "expected \"uniform\", \"mode_born\" or \"mixture\"");
    return std::nullopt;
}

std::optional<std::array<int, 2>> read_pair_of_ints(Reader& r, const json& j, const std::string& field,
                                                    int dimension, int minimum) {
    if (!j.is_array() || static_cast<int>(j.size()) != dimension) {
        r.fail(field, "expected " + std::to_string(dimension) + " integers");
        return std::nullopt;
    }
    std::array<int, 2> out{1, 1};
    for (int i = 0; i < dimension; ++i) {
        const json& v = j.at(static_cast<std::size_t>(i));
        if (!v.is_number_integer() || v.get<int>() < minimum) {
            r.fail(field, "entries must be integers >= " + std::to_string(minimum));
            return std::nullopt;
        }
        out[static_cast<std::size_t>(i)] = v.get<int>();
    }
    return out;
}

json density_json(const DensitySpec& spec, int dimension) {
    const auto& kind = spec.kind();
    if (std::holds_alternative<DensitySpec::Uniform>(kind)) {
        return {{"kind", "uniform"}};
    }
    if (const auto* m = std::get_if<DensitySpec::ModeBorn>(&kind)) {
        json n = json::array();
        for (int i = 0; i < dimension; ++i) {
            n.push_back(m->n[static_cast<std::size_t>(i)]);
        }
        return {{"kind", "mode_born"}, {"n", n}};
    }
    if (const auto* mix = std::get_if<DensitySpec::Mixture>(&kind)) {
        json parts = json::array();
        for (const auto& c : mix->components) {
            parts.push_back({{"weight", c.weight}, {"density", density_json(c.density, dimension)}});
        }
        return {{"kind", "mixture"}, {"components", parts}};
    }
    return {{"kind", "custom"}};
}

}  // namespace

ExperimentConfig validate_config(std::string_view raw) {
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }

    Reader r;
    ExperimentConfig cfg;
    if (!r.object(doc, "", {"wave", "density", "grid", "times", "integrator", "preimage_samples",
                            "pair_diagnostics", "output_dir", "run_seed"})) {
        throw ConfigError("config: expected a JSON object");
    }

    bool domain_ok = false;
    if (doc.contains("wave")) {
        read_wave(r, doc.at("wave"), cfg, domain_ok);
    } else {
        r.fail("wave", "missing");
    }

    if (!doc.contains("density")) {
        r.fail("density", "missing");
    } else if (domain_ok) {
        if (auto d = read_density(r, doc.at("density"), "density", cfg.domain)) {
            cfg.density = std::move(*d);
        }
    }

    const int dim = cfg.domain.dimension();
    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        if (r.object(g, "grid", {"cells", "quadrature"})) {
            if (g.contains("cells")) {
                if (auto c = read_pair_of_ints(r, g.at("cells"), "grid.cells", dim, 1)) {
                    cfg.cells = *c;
                }
            } else {
                r.fail("grid.cells", "missing");
            }
            if (g.contains("quadrature")) {
                if (auto q = read_pair_of_ints(r, g.at("quadrature"), "grid.quadrature", dim, 2)) {
                    cfg.quadrature = *q;
                }
            } else {
                r.fail("grid.quadrature", "missing");
            }
        }
    } else {
        r.fail("grid", "missing");
    }
    if (dim == 1) {
        cfg.cells[1] = 1;
        cfg.quadrature[1] = 1;
    }

    if (!doc.contains("times")) {
        r.fail("times", "missing");
    } else if (!doc.at("times").is_array() || doc.at("times").empty()) {
        r.fail("times", "expected a non-empty array of numbers");
    } else {
        bool numeric = true;
        for (const auto& v : doc.at("times")) {
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
                numeric = false;
                break;
            }
            cfg.times.push_back(v.get<double>());
        }
        if (!numeric) {
            r.fail("times", "entries must be finite numbers");
        } else if (cfg.times.front() != 0.0) {
            r.fail("times", "first snapshot time must be 0");
        } else if (std::adjacent_find(cfg.times.begin(), cfg.times.end(),
                                      [](double a, double b) { return !(a < b); }) != cfg.times.end()) {
            r.fail("times", "must be sorted in strictly ascending order");
        }
    }

    if (doc.contains("integrator")) {
        const json& ij = doc.at("integrator");
        if (r.object(ij, "integrator", {"rel_tol", "abs_tol", "max_step", "max_steps", "node_epsilon"})) {
            IntegratorSettings& s = cfg.integrator;
            s.rel_tol = r.get<double>(ij, "integrator", "rel_tol", false).value_or(s.rel_tol);
            s.abs_tol = r.get<double>(ij, "integrator", "abs_tol", false).value_or(s.abs_tol);
            s.max_step = r.get<double>(ij, "integrator", "max_step", false).value_or(s.max_step);
            s.max_steps = r.get<std::int64_t>(ij, "integrator", "max_steps", false).value_or(s.max_steps);
            s.node_epsilon =
                r.get<double>(ij, "integrator", "node_epsilon", false).value_or(s.node_epsilon);
            try {
                s.validate();
            } catch (const InvalidArgument& e) {
                r.fail("integrator", e.what());
            }
        }
    }

    if (auto p = r.get<std::int64_t>(doc, "", "preimage_samples", false)) {
        if (*p != 0 && *p < 100) {
            r.fail("preimage_samples", "must be 0 (disabled) or >= 100");
        }
        cfg.preimage_samples = *p;
    }

    if (doc.contains("pair_diagnostics")) {
        const json& pj = doc.at("pair_diagnostics");
        const std::string where = "pair_diagnostics";
        if (r.object(pj, where, {"count", "separation", "seed"})) {
            PairDiagnosticsConfig pc;
            pc.count = r.get<std::int64_t>(pj, where, "count", true).value_or(0);
            pc.separation = r.get<double>(pj, where, "separation", true).value_or(0.0);
            pc.seed = r.get<std::uint64_t>(pj, where, "seed", false).value_or(0);
            if (pc.count < 1) {
                r.fail(where + ".count", "must be >= 1");
            }
            if (!(pc.separation > 0.0) || !std::isfinite(pc.separation)) {
                r.fail(where + ".separation", "must be positive");
            } else if (domain_ok && cfg.domain.kind() == DomainKind::Box &&
                       2.0 * pc.separation >= std::min(cfg.domain.length(0),
                                                       dim == 2 ? cfg.domain.length(1)
                                                                : cfg.domain.length(0))) {
                r.fail(where + ".separation", "too large for the domain");
            }
            cfg.pairs = pc;
        }
    }

    cfg.output_dir = r.get<std::string>(doc, "", "output_dir", false).value_or(cfg.output_dir);
    cfg.run_seed = r.get<std::uint64_t>(doc, "", "run_seed", false).value_or(0);

    if (!r.ok()) {
        std::string message = "invalid config:";
        for (const auto& e : r.errors()) {
            message += "\n  " + e;
        }
        throw ConfigError(message);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return validate_config(buffer.str());
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
    const int dim = cfg.domain.dimension();
    json lengths = json::array();
    json modes = json::array();
    for (int i = 0; i < dim; ++i) {
        lengths.push_back(cfg.domain.length(i));
    }
    for (const auto& m : cfg.modes) {
        json n = json::array();
        for (int i = 0; i < dim; ++i) {
            n.push_back(m.n[static_cast<std::size_t>(i)]);
        }
        modes.push_back({{"n", n}, {"re", m.coefficient.real()}, {"im", m.coefficient.imag()}});
    }
    auto ints = [dim](const std::array<int, 2>& a) {
        json out = json::array();
        for (int i = 0; i < dim; ++i) {
            out.push_back(a[static_cast<std::size_t>(i)]);
        }
        return out;
    };
    json doc = {
        {"wave",
         {{"domain", {{"kind", to_string(cfg.domain.kind())}, {"dimension", dim}, {"lengths", lengths}}},
          {"modes", modes}}},
        {"density", density_json(cfg.density, dim)},
        {"grid", {{"cells", ints(cfg.cells)}, {"quadrature", ints(cfg.quadrature)}}},
        {"times", cfg.times},
        {"integrator",
         {{"rel_tol", cfg.integrator.rel_tol},
          {"abs_tol", cfg.integrator.abs_tol},
          {"max_step", cfg.integrator.max_step},
          {"max_steps", cfg.integrator.max_steps},
          {"node_epsilon", cfg.integrator.node_epsilon}}},
        {"preimage_samples", cfg.preimage_samples},
        {"output_dir", cfg.output_dir},
        {"run_seed", cfg.run_seed},
    };
    if (cfg.pairs) {
        doc["pair_diagnostics"] = {
            {"count", cfg.pairs->count}, {"separation", cfg.pairs->separation}, {"seed", cfg.pairs->seed}};
    }
    return doc.dump(2);
}

}  // namespace bohmrelax
