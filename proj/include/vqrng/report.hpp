#pragma once

#include "json.hpp"
#include <string>

#include "vqrng/entropy_model.hpp"

namespace vqrng {

/// Flat JSON object with the fixed fields eta, g_chi0, range_R, bins_d,
/// log2_P, b_adc, hmin_ideal, hmin_adc, hmin_final, k, l, eps_param, eps_adc,
/// eps_hash plus flags and block geometry.
nlohmann::json report_to_json(const EntropyReport& report);

/// Inverse of report_to_json; unknown members are ignored. Throws FormatError.
EntropyReport report_from_json(const nlohmann::json& doc);

EntropyReport load_report(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& doc);

}  // namespace vqrng
