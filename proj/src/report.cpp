#include "vqrng/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "vqrng/errors.hpp"

namespace vqrng {

namespace {

// JSON has no infinities; -inf log2_P is stored as null.
nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_or(const nlohmann::json& doc, const char* key, double fallback) {
    const auto it = doc.find(key);
    if (it == doc.end()) {
        return fallback;
    }
    if (it->is_null()) {
        return -std::numeric_limits<double>::infinity();
    }
    if (!it->is_number()) {
        throw FormatError(std::string("report field '") + key + "' is not a number");
    }
    return it->get<double>();
}

double required(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) {
        throw FormatError(std::string("report lacks field '") + key + "'");
    }
    return number_or(doc, key, 0.0);
}

}  // namespace

nlohmann::json report_to_json(const EntropyReport& r) {
    nlohmann::json j;
    j["eta"] = r.params.eta;
    j["g_chi0"] = r.params.g_chi0;
    j["range_R"] = r.params.adc.range_R;
    j["bins_d"] = r.params.adc.bins_d;
    j["log2_P"] = finite_or_null(r.params.log2_P);
    j["b_adc"] = r.params.b_adc;
    j["hmin_ideal"] = r.hmin_ideal;
    j["hmin_adc"] = r.hmin_adc;
    j["hmin_final"] = r.hmin_final;
    j["hmin_final_unclamped"] = finite_or_null(r.hmin_final_raw);
    j["k"] = r.k;
    j["l"] = r.l;
    j["eps_param"] = r.eps.eps_param;
    j["eps_adc"] = r.eps.eps_adc;
    j["eps_hash"] = r.eps.eps_hash;
    j["bits_per_sample"] = r.bits_per_sample;
    j["samples_per_block"] = r.samples_per_block;
    j["exhausted"] = r.exhausted;
    j["saturated"] = r.saturated;
    return j;
}

EntropyReport report_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw FormatError("entropy report must be a JSON object");
    }
    EntropyReport r;
    r.params.eta = required(doc, "eta");
    r.params.g_chi0 = required(doc, "g_chi0");
    r.params.adc.range_R = required(doc, "range_R");
    r.params.adc.bins_d = static_cast<std::uint64_t>(required(doc, "bins_d"));
    r.params.adc.bits = static_cast<int>(std::lround(std::log2(static_cast<double>(r.params.adc.bins_d))));
    r.params.log2_P = required(doc, "log2_P");
    r.params.b_adc = required(doc, "b_adc");
    r.hmin_ideal = required(doc, "hmin_ideal");
    r.hmin_adc = required(doc, "hmin_adc");
    r.hmin_final = required(doc, "hmin_final");
    r.hmin_final_raw = number_or(doc, "hmin_final_unclamped", r.hmin_final);
    r.k = static_cast<std::uint64_t>(required(doc, "k"));
    r.l = static_cast<std::uint64_t>(required(doc, "l"));
    r.eps.eps_param = required(doc, "eps_param");
    r.eps.eps_adc = required(doc, "eps_adc");
    r.eps.eps_hash = required(doc, "eps_hash");
    r.bits_per_sample = static_cast<int>(number_or(doc, "bits_per_sample", 16));
    r.samples_per_block = static_cast<std::uint64_t>(number_or(doc, "samples_per_block", 0));
    r.exhausted = doc.value("exhausted", r.hmin_final <= 0.0);
    r.saturated = doc.value("saturated", false);
    return r;
}

EntropyReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open report " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return report_from_json(doc);
}

void save_json(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << doc.dump(2) << '\n';
}

}  // namespace vqrng
