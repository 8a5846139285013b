#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "divband/bands.hpp"
#include "divband/errors.hpp"
#include "divband/model.hpp"
#include "divband/penalty.hpp"
#include "divband/simulate.hpp"

namespace divband {

using nlohmann::json;

// ============================================================================
// JSON ingestion and emission
// ============================================================================

/// Model document:
/// {"p": number, "lambda": number, "claims": {"kind": "exp"|"erlang"|"hyperexp",
///  ...}, "sigma2": number, "q": number}
inline RiskModel model_from_json(const json& j) {
    try {
        double p = j.at("p").get<double>();
        double lambda = j.at("lambda").get<double>();
        double sigma2 = j.at("sigma2").get<double>();
        double q = j.at("q").get<double>();
        const json& c = j.at("claims");
        std::string kind = c.at("kind").get<std::string>();
        ClaimLaw law;
        if (kind == "exp") {
            law = ExponentialClaims{c.at("mu").get<double>()};
        } else if (kind == "erlang") {
            law = ErlangClaims{c.at("n").get<int>(), c.at("mu").get<double>()};
        } else if (kind == "hyperexp") {
            law = HyperExponentialClaims{
                c.at("weights").get<std::vector<double>>(),
                c.at("rates").get<std::vector<double>>()};
        } else {
            throw InputError("unknown claims kind '" + kind + "'");
        }
        return RiskModel(p, lambda, std::move(law), sigma2, q);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model document: ") + e.what());
    }
}

inline RiskModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(j);
}

/// Strategy document: {"bands": [{"a": x, "b_minus": y, "b_plus": z}]}
inline CandidateLevels strategy_from_json(const json& j) {
    CandidateLevels out;
    try {
        for (const auto& b : j.at("bands")) {
            Band band;
            band.a = b.at("a").get<double>();
            band.b_minus = b.at("b_minus").get<double>();
            band.b_plus = b.at("b_plus").get<double>();
            if (b.contains("stopping")) band.stopping = b["stopping"].get<bool>();
            out.bands.push_back(band);
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed strategy document: ") + e.what());
    }
    return out;
}

inline CandidateLevels load_strategy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open strategy file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(std::string("strategy file is not valid JSON: ") + e.what());
    }
    return strategy_from_json(j);
}

inline json strategy_to_json(const CandidateLevels& s) {
    json bands = json::array();
    for (const auto& b : s.bands) {
        json jb{{"a", b.a}, {"b_minus", b.b_minus}, {"b_plus", b.b_plus}};
        if (b.stopping) jb["stopping"] = true;
        bands.push_back(jb);
    }
    return json{{"bands", bands}};
}

inline json sim_result_to_json(const SimResult& r) {
    return json{{"mean", r.mean},
                {"stderr", r.stderr_},
                {"n_paths", r.n_paths},
                {"ruin_fraction", r.ruin_fraction},
                {"mean_discounted_penalty", r.mean_discounted_penalty},
                {"mean_discounted_dividends", r.mean_discounted_dividends},
                {"truncation_bias_bound", r.truncation_bias_bound}};
}

/// Fixed CSV number format: '.' separator, 12 significant digits.
inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace divband
