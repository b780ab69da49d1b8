#include "vqrng/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "vqrng/digitization.hpp"
#include "vqrng/errors.hpp"
#include "vqrng/report.hpp"
#include "vqrng/sample_block.hpp"
#include "vqrng/signal_simulator.hpp"
#include "vqrng/theory.hpp"
#include "vqrng/toeplitz.hpp"

namespace vqrng {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const DegenerateSpectrum*>(&e)) return exit_code::degenerate_spectrum;
    if (dynamic_cast<const BudgetRefused*>(&e)) return exit_code::budget_refused;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const std::domain_error*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) {
        return exit_code::config_error;
    }
    return exit_code::failure;
}

nlohmann::json config_to_json(const PipelineConfig& config) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [section, body] : config.sections()) {
        for (const auto& [key, value] : body) {
            j[section][key] = value;
        }
    }
    return j;
}

namespace {

void write_psd(const std::filesystem::path& path, const SpectralDensity& psd) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    write_psd_csv(out, psd);
}

// Digitization penalty: explicit override, else the audited table, else a perfect ADC.
double resolve_b_adc(const PipelineConfig& config, std::uint64_t bins) {
    if (auto b = config.get_optional_double("model", "b_adc")) {
        return *b;
    }
    if (config.has("adc", "digitization_table")) {
        return adc_digitization_penalty(
            DigitizationErrorModel::load_csv(config.get("adc", "digitization_table"), static_cast<std::uint32_t>(bins)));
    }
    return 0.0;
}

// log2 P: explicit override, else Hoeffding on the [model] counts, else the measured counts.
std::optional<InRangeBound> model_in_range(const PipelineConfig& config) {
    if (config.has("model", "n_total") || config.has("model", "n_in_range")) {
        const long long n = config.get_int("model", "n_total");
        const long long n1 = config.get_int("model", "n_in_range");
        if (n <= 0 || n1 < 0) {
            throw ConfigError("model.n_total and model.n_in_range must be non-negative counts");
        }
        return in_range_bound(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(n1),
                              config.param_split().in_range);
    }
    return std::nullopt;
}

AdcGeometry model_geometry(const PipelineConfig& config, int bits) {
    AdcGeometry geom = AdcGeometry::from_bits(bits);
    if (config.has("model", "bins_d")) {
        geom.bins_d = static_cast<std::uint64_t>(config.get_int("model", "bins_d"));
        geom.range_R = static_cast<double>(geom.bins_d) / 2.0;
        geom.bits = static_cast<int>(std::lround(std::log2(static_cast<double>(geom.bins_d))));
    }
    if (auto r = config.get_optional_double("model", "range_R")) {
        geom.range_R = *r;
    }
    geom.validate();
    return geom;
}

nlohmann::json finalize_report(const PipelineConfig& config, const EntropyReport& entropy) {
    nlohmann::json doc = report_to_json(entropy);
    doc["eps_split"] = {{"eta", config.param_split().eta},
                        {"g_chi0", config.param_split().gain},
                        {"P", config.param_split().in_range}};
    if (config.has("epsilon", "eps_seed")) {
        doc["eps_seed"] = config.get_double("epsilon", "eps_seed");
    }
    doc["config"] = config_to_json(config);
    doc["config_ini"] = config.to_ini();
    return doc;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

}  // namespace

SimulateSummary cmd_simulate(const PipelineConfig& config, std::uint64_t n, std::uint64_t seed,
                             const std::string& out_path) {
    const GeneratorConfig gen = config.generator();
    SampleBlock block = generate_stream(gen, n, seed);
    block.params_snapshot = gen.describe() + "\n" + config.to_ini();
    {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            throw ConfigError("cannot write " + out_path);
        }
        write_sample_block(out, block);
        if (!out) {
            throw std::runtime_error("write failed: " + out_path);
        }
    }
    SimulateSummary s;
    s.n_total = block.n_total;
    s.n_out_of_range = block.n_out_of_range;
    s.file_bytes = std::filesystem::file_size(out_path);
    std::ifstream in(out_path, std::ios::binary);
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    s.file_sha256 = hex(sha256(bytes));
    return s;
}

CharacterizeResult cmd_characterize(const PipelineConfig& config, const CharacterizeInputs& inputs) {
    CharacterizeResult result;
    nlohmann::json detail;
    std::vector<std::string> warnings;
    const auto split = config.param_split();
    const EpsilonBudget eps = config.epsilons();
    const ExtractorConfig xcfg = config.extractor();

    auto load = [](const std::string& path) {
        try {
            return load_sample_block(path);
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    };
    const SampleBlock total = load(inputs.total_block);
    std::optional<SampleBlock> electronic;
    if (!inputs.electronic_block.empty()) {
        electronic = load(inputs.electronic_block);
        if (electronic->bits_per_sample != total.bits_per_sample) {
            throw ConfigError("total and electronic blocks use different ADC depths");
        }
    }

    // Efficiency and shot-noise calibration.
    double eta = config.get_double("simulation", "eta");
    std::string eta_source = "config";
    for (const std::string& path : inputs.calibration_csv) {
        const CalibrationTable table = load_calibration_csv(path);
        if (table.kind == CalibrationKind::noise_variance) {
            result.linearity = shot_noise_linearity(table.records,
                                                    config.get_double("characterization", "electronic_variance"),
                                                    config.get_double("characterization", "shot_noise_threshold"));
            detail["shot_noise"] = {{"slope", result.linearity->slope},
                                    {"max_relative_residual", result.linearity->max_relative_residual},
                                    {"is_shot_limited", result.linearity->is_shot_limited}};
            if (!result.linearity->is_shot_limited) {
                result.status = exit_code::not_shot_limited;
            }
        } else {
            const ResponsivityFit fit = fit_responsivity(table.records);
            const double wavelength = config.get_double("characterization", "wavelength_m");
            const double eta_hat = quantum_efficiency(fit.responsivity, wavelength);
            const double sigma = eta_hat * fit.standard_error / fit.responsivity;
            result.efficiency = certify_efficiency_bound(
                eta_hat, sigma, config.get_double("characterization", "power_meter_systematic"), split.eta);
            eta = result.efficiency->upper;
            eta_source = "responsivity";
            detail["efficiency"] = {{"responsivity_A_per_W", fit.responsivity},
                                    {"responsivity_se", fit.standard_error},
                                    {"eta_estimate", eta_hat},
                                    {"eta_sigma", sigma},
                                    {"eta_upper", eta}};
        }
    }
    if (auto e = config.get_optional_double("model", "eta")) {
        eta = *e;
        eta_source = "override";
    }

    // Spectra and the gain-bandwidth product.
    const WelchOptions wopts = config.welch();
    const WelchEstimate w_total = psd_welch(total, wopts);
    std::optional<WelchEstimate> w_elec;
    if (electronic) {
        w_elec = psd_welch(*electronic, wopts);
    }
    warnings = w_total.warnings;
    if (w_elec) {
        warnings.insert(warnings.end(), w_elec->warnings.begin(), w_elec->warnings.end());
    }
    const long long zero_below = config.get_int("characterization", "zero_below_bin");
    if (zero_below < 0) {
        throw ConfigError("characterization.zero_below_bin must be non-negative");
    }
    result.gain = gain_bandwidth_bootstrap(w_total, w_elec ? &*w_elec : nullptr, eta,
                                           static_cast<std::size_t>(zero_below), config.vacuum(), config.bootstrap());
    if (!inputs.psd_dir.empty()) {
        std::filesystem::create_directories(inputs.psd_dir);
        const std::filesystem::path dir(inputs.psd_dir);
        write_psd(dir / "psd_total.csv", w_total.psd);
        if (w_elec) write_psd(dir / "psd_electronic.csv", w_elec->psd);
        write_psd(dir / "psd_vacuum.csv", result.gain.vacuum.psd);
    }
    detail["gain"] = {{"point", result.gain.point},
                      {"lower", result.gain.lower},
                      {"upper", result.gain.upper},
                      {"standard_error", result.gain.standard_error},
                      {"percentile_2_5", result.gain.percentile_low},
                      {"percentile_97_5", result.gain.percentile_high},
                      {"resamples", result.gain.resamples},
                      {"floor", result.gain.vacuum.floor},
                      {"excluded_bins", result.gain.vacuum.excluded_bins},
                      {"nonpositive_bins", result.gain.vacuum.nonpositive_bins},
                      {"low_frequency_policy", "floor"}};

    // In-range probability.
    result.in_range = in_range_bound(total.n_total, total.n_in_range(), split.in_range);
    if (auto b = model_in_range(config)) {
        result.in_range = *b;
    }
    detail["in_range"] = {{"n_total", total.n_total},
                          {"n_in_range", total.n_in_range()},
                          {"p_hat", result.in_range.p_hat},
                          {"p_lower", result.in_range.p_lower}};

    ModelParams params;
    params.eta = eta;
    params.adc = model_geometry(config, total.bits_per_sample);
    params.g_chi0 = config.get_optional_double("model", "g_chi0").value_or(result.gain.lower);
    params.log2_P = config.get_optional_double("model", "log2_P").value_or(result.in_range.log2_P);
    params.b_adc = resolve_b_adc(config, params.adc.bins_d);
    if (!(params.g_chi0 > 0.0)) {
        throw DegenerateSpectrum("certified gain-bandwidth product is not positive");
    }
    result.entropy = make_entropy_report(params, eps, xcfg.l, xcfg.bits_per_sample);

    detail["eta_source"] = eta_source;
    result.report = finalize_report(config, result.entropy);
    result.report["characterization"] = detail;
    result.report["warnings"] = warnings;
    return result;
}

nlohmann::json cmd_entropy(const PipelineConfig& config, EntropyReport* out) {
    const EpsilonBudget eps = config.epsilons();
    const ExtractorConfig xcfg = config.extractor();
    if (!config.has("model", "g_chi0")) {
        throw ConfigError("entropy needs model.g_chi0");
    }
    ModelParams params;
    params.eta = config.get_optional_double("model", "eta").value_or(config.get_double("simulation", "eta"));
    params.g_chi0 = config.get_double("model", "g_chi0");
    params.adc = model_geometry(config, static_cast<int>(config.get_int("adc", "bits")));
    nlohmann::json in_range;
    if (auto p = config.get_optional_double("model", "log2_P")) {
        params.log2_P = *p;
    } else if (auto b = model_in_range(config)) {
        params.log2_P = b->log2_P;
        in_range = {{"p_hat", b->p_hat}, {"p_lower", b->p_lower}, {"penalty", b->penalty}};
    }
    params.b_adc = resolve_b_adc(config, params.adc.bins_d);
    const EntropyReport report = make_entropy_report(params, eps, xcfg.l, xcfg.bits_per_sample);
    if (out) {
        *out = report;
    }
    nlohmann::json doc = finalize_report(config, report);
    if (!in_range.is_null()) {
        doc["in_range"] = in_range;
    }
    return doc;
}

void TheoryGrid::validate() const {
    if (!(eta_min > 0.0 && eta_max < 1.0 && eta_min <= eta_max) || eta_steps == 0) {
        throw ConfigError("efficiency grid must lie inside (0,1)");
    }
    if (!(db_min <= db_max) || db_steps == 0 || !(eta > 0.0 && eta < 1.0) || !(sigmas > 0.0)) {
        throw ConfigError("invalid excess-noise grid");
    }
    if (bit_depths.empty()) {
        throw ConfigError("no ADC depths requested");
    }
    for (int b : bit_depths) {
        if (b < 1 || b > 32) throw ConfigError("ADC depth out of range");
    }
}

std::size_t cmd_theory_curves(const std::string& mode, const TheoryGrid& grid, std::ostream& out) {
    grid.validate();
    std::vector<CurvePoint> points;
    if (mode == "fig2a") {
        points = fig2a_curve(linspace(grid.eta_min, grid.eta_max, grid.eta_steps), grid.bit_depths, grid.excess_db);
    } else if (mode == "fig2b") {
        points = fig2b_curve(linspace(grid.db_min, grid.db_max, grid.db_steps), grid.bit_depths, grid.eta,
                             grid.sigmas);
    } else {
        throw ConfigError("theory-curves mode must be fig2a or fig2b");
    }
    out << (mode == "fig2a" ? "eta" : "excess_db") << ",bits,gain,hmin\n";
    out << std::setprecision(10);
    for (const CurvePoint& p : points) {
        out << p.x << ',' << p.bits << ',';
        if (std::isinf(p.gain)) {
            out << "inf";
        } else {
            out << p.gain;
        }
        out << ',' << p.hmin << '\n';
    }
    return points.size();
}

ExtractSummary cmd_extract(const PipelineConfig& config, const EntropyReport& report, const std::string& in_path,
                           const std::string& seed_file, const std::string& out_path) {
    const ExtractorConfig xcfg = config.extractor();
    if (!(report.hmin_final > 0.0)) {
        throw BudgetRefused("certified min-entropy is zero; refusing to extract");
    }
    const std::uint64_t budget = extractable_length(xcfg.l, report.hmin_final, xcfg.bits_per_sample, xcfg.eps_hash);
    if (xcfg.k > budget) {
        throw BudgetRefused("k = " + std::to_string(xcfg.k) + " exceeds the leftover-hash bound " +
                            std::to_string(budget));
    }
    if (seed_file.empty() || !std::filesystem::exists(seed_file)) {
        throw ConfigError("seed file not found: " + (seed_file.empty() ? std::string("(none)") : seed_file));
    }
    const ToeplitzSeed seed = ToeplitzSeed::load(xcfg.k, xcfg.l, seed_file);
    BlockExtractor extractor(xcfg, report, seed);

    std::ifstream in_file;
    std::istream* in = &std::cin;
    if (in_path != "-") {
        in_file.open(in_path, std::ios::binary);
        if (!in_file) {
            throw ConfigError("cannot open " + in_path);
        }
        in = &in_file;
    }
    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (out_path != "-") {
        out_file.open(out_path, std::ios::binary);
        if (!out_file) {
            throw ConfigError("cannot write " + out_path);
        }
        out = &out_file;
    }

    SampleReader reader(*in);
    BitWriter writer;
    ExtractSummary s;
    std::vector<std::int16_t> buffer(1 << 16);
    const auto sink = [&](const RandomOutput& o) { writer.append(o); };
    while (const std::size_t got = reader.read(buffer)) {
        extractor.push(std::span<const std::int16_t>(buffer.data(), got), sink);
        s.input_codes += got;
        const auto bytes = writer.take_complete();
        out->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    const auto tail = writer.flush();
    out->write(reinterpret_cast<const char*>(tail.data()), static_cast<std::streamsize>(tail.size()));
    out->flush();
    if (!*out) {
        throw std::runtime_error("write failed: " + out_path);
    }

    s.blocks = extractor.blocks();
    s.output_bits = writer.bit_count();
    s.discarded_codes = extractor.pending_codes();
    s.budget_k = extractor.budget_k();
    s.rate_ratio = static_cast<double>(xcfg.k) / static_cast<double>(xcfg.l);
    s.input_rate_gbps = config.get_double("extractor", "input_rate_gbps");
    s.output_rate_gbps = s.rate_ratio * s.input_rate_gbps;
    s.seed_digest = seed.digest();
    s.seed_source = seed.source_tag();
    return s;
}

void print_extract_summary(std::ostream& out, const ExtractSummary& s) {
    out << "blocks " << s.blocks << '\n'
        << "output_bits " << s.output_bits << '\n'
        << "input_codes " << s.input_codes << " (" << s.discarded_codes << " trailing codes discarded)\n"
        << "leftover_hash_budget_k " << s.budget_k << '\n'
        << std::fixed << std::setprecision(5) << "rate_ratio " << s.rate_ratio << '\n'
        << std::setprecision(4) << "output_rate_gbps " << s.output_rate_gbps << " at " << s.input_rate_gbps
        << " Gb/s input\n"
        << "seed_sha256 " << s.seed_digest << " (" << s.seed_source << ")\n";
    out.unsetf(std::ios::floatfield);
}

std::vector<SelftestCase> selftest() {
    std::vector<SelftestCase> cases;
    auto add = [&](std::string name, bool pass, std::string detail) {
        cases.push_back({std::move(name), pass, std::move(detail)});
    };
    auto fmt = [](double v) {
        std::ostringstream os;
        os << std::setprecision(10) << v;
        return os.str();
    };

    // Reference erf values computed in extended precision.
    const std::pair<double, double> erf_table[] = {
        {3.142709e-4, 3.54616724709641799e-4}, {0.5, 0.520499877813046538}, {2.5, 0.999593047982555041}};
    double worst = 0.0;
    for (const auto& [x, ref] : erf_table) {
        worst = std::max(worst, std::abs(std::erf(x) - ref) / ref);
    }
    add("erf relative accuracy", worst < 1e-15, "max rel err " + fmt(worst));

    ModelParams p;
    p.eta = 0.81;
    p.g_chi0 = 2581.0;
    p.adc = AdcGeometry::from_bits(16);
    p.log2_P = in_range_bound(1000000000ULL, 1000000000ULL, 1e-10).log2_P;
    p.b_adc = 7.80;
    const AdcEntropy e = min_entropy_adc(p);
    add("perfect-ADC entropy", std::abs(e.perfect_adc - 11.47) <= 0.01, fmt(e.perfect_adc));
    add("final entropy", std::abs(e.bits - 3.67) <= 0.01, fmt(e.bits));

    const std::uint64_t k = extractable_length(7872, 3.67, 16, 1e-17);
    add("leftover hash length", k == 1693, std::to_string(k));

    const ToeplitzSeed seed(2, 3, {1, 0, 1, 1});
    const std::vector<std::uint8_t> in{1, 1, 0};
    const auto outbits = toeplitz_hash_naive(seed, in);
    add("pinned Toeplitz vector", outbits == std::vector<std::uint8_t>{1, 0},
        std::to_string(outbits[0]) + std::to_string(outbits[1]));

    add("smear penalty", std::abs(adc_digitization_penalty(DigitizationErrorModel::smear(64, 1)) - std::log2(3.0)) <
                             1e-12,
        fmt(adc_digitization_penalty(DigitizationErrorModel::smear(64, 1))));
    return cases;
}

}  // namespace vqrng
