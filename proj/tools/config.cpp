#include "config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "smallgain/parser.hpp"

namespace sgcli {

namespace {

using json = nlohmann::json;

std::string ptr(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string ptr(const std::string& base, std::size_t k) { return base + "/" + std::to_string(k); }

const json& field(const json& obj, const std::string& base, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(ptr(base, key), "missing");
    return obj.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where, "expected a number");
    return j.get<double>();
}

std::size_t count(const json& j, const std::string& where) {
    if (!j.is_number_unsigned()) throw ConfigError(where, "expected a non-negative integer");
    return j.get<std::size_t>();
}

const json& array(const json& j, const std::string& where, std::optional<std::size_t> size = std::nullopt) {
    if (!j.is_array()) throw ConfigError(where, "expected an array");
    if (size && j.size() != *size) {
        throw ConfigError(where, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
    }
    return j;
}

Vec vec(const json& j, const std::string& where, std::optional<std::size_t> size = std::nullopt) {
    array(j, where, size);
    Vec v;
    for (std::size_t k = 0; k < j.size(); ++k) v.push_back(number(j[k], ptr(where, k)));
    return v;
}

Matrix matrix(const json& j, const std::string& where) {
    array(j, where);
    if (j.empty()) throw ConfigError(where, "empty matrix");
    Matrix m;
    for (std::size_t k = 0; k < j.size(); ++k) {
        m.push_back(vec(j[k], ptr(where, k), k > 0 ? std::optional(m[0].size()) : std::nullopt));
    }
    return m;
}

GainExpr gain(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where, "expected a gain string");
    try {
        return parse_gain(j.get<std::string>());
    } catch (const Error& e) {
        throw ConfigError(where, std::string(e.name()) + " " + e.what());
    }
}

Maf maf(const json& j, const std::string& where) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "sum") return Maf::sum();
        if (s == "max") return Maf::max();
        throw ConfigError(where, "unknown aggregation '" + s + "'");
    }
    if (j.is_object() && j.size() == 1) {
        if (j.contains("outer_sum")) return Maf::outer_sum(gain(j["outer_sum"], ptr(where, "outer_sum")));
        if (j.contains("block_max_sum")) {
            const std::string w = ptr(where, "block_max_sum");
            std::vector<std::vector<std::size_t>> blocks;
            const json& b = array(j["block_max_sum"], w);
            for (std::size_t k = 0; k < b.size(); ++k) {
                std::vector<std::size_t> idx;
                const json& row = array(b[k], ptr(w, k));
                for (std::size_t m = 0; m < row.size(); ++m) idx.push_back(count(row[m], ptr(ptr(w, k), m)));
                blocks.push_back(std::move(idx));
            }
            return Maf::block_max_sum(std::move(blocks));
        }
    }
    throw ConfigError(where, "expected \"sum\", \"max\", {\"outer_sum\": ...} or {\"block_max_sum\": ...}");
}

InputSignal input_signal(const json& j, const std::string& where, std::size_t dim) {
    if (!j.is_object()) throw ConfigError(where, "expected an object");
    const std::string type = field(j, where, "type").get<std::string>();
    if (type == "zero") return InputSignal::zero(dim);
    if (type == "constant") return InputSignal::constant(vec(field(j, where, "value"), ptr(where, "value"), dim));
    if (type == "step") {
        const double t0 = j.contains("t0") ? number(j["t0"], ptr(where, "t0")) : 0.0;
        return InputSignal::step(vec(field(j, where, "value"), ptr(where, "value"), dim), t0);
    }
    if (type == "sinusoid") {
        return InputSignal::sinusoid(vec(field(j, where, "amplitude"), ptr(where, "amplitude"), dim),
                                     number(field(j, where, "freq"), ptr(where, "freq")));
    }
    if (type == "piecewise") {
        const std::string w = ptr(where, "pieces");
        const json& p = array(field(j, where, "pieces"), w);
        std::vector<std::pair<double, Vec>> pieces;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const json& e = array(p[k], ptr(w, k), 2);
            pieces.emplace_back(number(e[0], ptr(ptr(w, k), 0)), vec(e[1], ptr(ptr(w, k), 1), dim));
        }
        return InputSignal::piecewise(std::move(pieces));
    }
    throw ConfigError(ptr(where, "type"), "unknown input type '" + type + "'");
}

LinearParams linear_model(const json& j, const std::string& where, std::size_t n) {
    LinearParams p;
    const json& A = array(field(j, where, "A"), ptr(where, "A"), n);
    const json& Q = array(field(j, where, "Q"), ptr(where, "Q"), n);
    for (std::size_t i = 0; i < n; ++i) {
        p.A.push_back(matrix(A[i], ptr(ptr(where, "A"), i)));
        p.Q.push_back(matrix(Q[i], ptr(ptr(where, "Q"), i)));
    }
    if (j.contains("B")) {
        const json& B = array(j["B"], ptr(where, "B"), n);
        for (std::size_t i = 0; i < n; ++i) p.B.push_back(matrix(B[i], ptr(ptr(where, "B"), i)));
        p.input_dim = p.B[0][0].size();
    }
    p.Delta.assign(n, std::vector<Matrix>(n));
    if (j.contains("Delta")) {
        const std::string w = ptr(where, "Delta");
        const json& D = array(j["Delta"], w, n);
        for (std::size_t i = 0; i < n; ++i) {
            const json& row = array(D[i], ptr(w, i), n);
            for (std::size_t k = 0; k < n; ++k) {
                if (!row[k].is_null()) p.Delta[i][k] = matrix(row[k], ptr(ptr(w, i), k));
            }
        }
    }
    if (j.contains("epsilon")) p.epsilon = number(j["epsilon"], ptr(where, "epsilon"));
    return p;
}

CgParams cg_model(const json& j, const std::string& where, std::size_t n) {
    CgParams p;
    p.T = matrix(field(j, where, "T"), ptr(where, "T"));
    if (p.T.size() != n) throw ConfigError(ptr(where, "T"), "expected " + std::to_string(n) + " rows");
    auto gains = [&](const char* key) {
        std::vector<GainExpr> g;
        const json& a = array(field(j, where, key), ptr(where, key), n);
        for (std::size_t i = 0; i < n; ++i) g.push_back(gain(a[i], ptr(ptr(where, key), i)));
        return g;
    };
    p.activation = gains("activation");
    p.b_tilde = gains("b_tilde");
    p.rho = gain(field(j, where, "rho"), ptr(where, "rho"));
    p.alpha_lo = vec(field(j, where, "alpha_lo"), ptr(where, "alpha_lo"), n);
    p.alpha_hi = vec(field(j, where, "alpha_hi"), ptr(where, "alpha_hi"), n);
    if (j.contains("epsilon")) p.epsilon = number(j["epsilon"], ptr(where, "epsilon"));
    return p;
}

std::size_t input_dim(const NetworkConfig& cfg) {
    if (!cfg.model) return 0;
    if (cfg.model->linear) return cfg.model->linear->input_dim;
    return cfg.n;
}

}  // namespace

std::optional<ExternalMode> parse_mode(const std::string& s) {
    if (s == "sum") return ExternalMode::Additive;
    if (s == "max") return ExternalMode::Max;
    if (s == "separated") return ExternalMode::Separated;
    if (s == "general") return ExternalMode::General;
    return std::nullopt;
}

NetworkConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("", "cannot open " + file.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "invalid JSON at byte " + std::to_string(e.byte));
    }
    if (!doc.is_object()) throw ConfigError("", "expected a JSON object");

    try {
        NetworkConfig cfg;
        cfg.n = count(field(doc, "", "n"), "/n");
        if (cfg.n == 0) throw ConfigError("/n", "must be positive");
        const std::size_t n = cfg.n;

        if (doc.contains("model")) {
            const json& m = doc["model"];
            ModelConfig mc;
            mc.family = field(m, "/model", "family").get<std::string>();
            if (mc.family == "linear") mc.linear = linear_model(m, "/model", n);
            else if (mc.family == "cohen_grossberg") mc.cg = cg_model(m, "/model", n);
            else throw ConfigError("/model/family", "unknown family '" + mc.family + "'");
            cfg.model = std::move(mc);
        }

        if (doc.contains("gains")) {
            std::vector<std::vector<GainExpr>> g(n, std::vector<GainExpr>(n));
            const json& rows = array(doc["gains"], "/gains", n);
            for (std::size_t i = 0; i < n; ++i) {
                const json& row = array(rows[i], ptr("/gains", i), n);
                for (std::size_t k = 0; k < n; ++k) g[i][k] = gain(row[k], ptr(ptr("/gains", i), k));
            }
            std::vector<GainExpr> gu(n);
            if (doc.contains("external_gains")) {
                const json& e = array(doc["external_gains"], "/external_gains", n);
                for (std::size_t i = 0; i < n; ++i) gu[i] = gain(e[i], ptr("/external_gains", i));
            }
            std::vector<Maf> mu;
            const json& m = array(field(doc, "", "mu"), "/mu", n);
            for (std::size_t i = 0; i < n; ++i) mu.push_back(maf(m[i], ptr("/mu", i)));
            try {
                cfg.net.emplace(std::move(g), std::move(gu), std::move(mu));
            } catch (const Error& e) {
                throw ConfigError("/gains", std::string("network rejected: ") + e.what());
            }
        } else if (!cfg.model) {
            throw ConfigError("/gains", "missing (and no model to derive them from)");
        }

        if (doc.contains("alpha")) cfg.alpha = gain(doc["alpha"], "/alpha");
        if (doc.contains("separation")) cfg.separation = number(doc["separation"], "/separation");
        if (doc.contains("mode")) {
            cfg.mode = parse_mode(doc["mode"].get<std::string>());
            if (!cfg.mode) throw ConfigError("/mode", "expected sum, max, separated or general");
        }

        if (doc.contains("simulation")) {
            const json& s = doc["simulation"];
            SimulationConfig sc;
            const std::size_t dim = cfg.model && cfg.model->linear
                                        ? [&] {
                                              std::size_t d = 0;
                                              for (const Matrix& a : cfg.model->linear->A) d += a.size();
                                              return d;
                                          }()
                                        : n;
            sc.x0 = vec(field(s, "/simulation", "x0"), "/simulation/x0", dim);
            sc.input = s.contains("input") ? input_signal(s["input"], "/simulation/input", input_dim(cfg))
                                           : InputSignal::zero(input_dim(cfg));
            if (s.contains("T")) sc.T = number(s["T"], "/simulation/T");
            if (s.contains("dt")) sc.dt = number(s["dt"], "/simulation/dt");
            if (!(sc.T > 0.0) || !(sc.dt > 0.0)) throw ConfigError("/simulation", "T and dt must be positive");
            cfg.simulation = std::move(sc);
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("", std::string("malformed config: ") + e.what());
    }
}

GainNetwork network_of(const NetworkConfig& cfg) {
    if (cfg.net) return *cfg.net;
    if (cfg.model->linear) return linear_gains(*cfg.model->linear).net;
    return cg_gains(*cfg.model->cg);
}

std::vector<SubsystemSpec> subsystems_of(const NetworkConfig& cfg) {
    if (cfg.model && cfg.model->linear) {
        std::vector<SubsystemSpec> subs;
        for (const Matrix& P : linear_gains(*cfg.model->linear).P) subs.push_back(SubsystemSpec::quadratic(P));
        return subs;
    }
    return std::vector<SubsystemSpec>(cfg.n, SubsystemSpec::norm());
}

SystemModel model_of(const NetworkConfig& cfg) {
    if (!cfg.model) throw ConfigError("/model", "missing; this command needs a model family");
    if (cfg.model->linear) return SystemModel::linear(*cfg.model->linear);
    return SystemModel::cohen_grossberg(*cfg.model->cg);
}

}  // namespace sgcli
