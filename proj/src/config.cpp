#include "vqrng/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vqrng/errors.hpp"

namespace vqrng {

namespace {

// Empty default: optional key, unset unless given.
const std::map<std::string, PipelineConfig::Section>& schema() {
    static const std::map<std::string, PipelineConfig::Section> kSchema = {
        {"simulation", {{"eta", "0.8"}, {"paths", "both"}}},
        {"noise", {{"kind", "gaussian"}, {"variance", "1.0"}, {"components", ""}, {"replay_file", ""}}},
        {"vacuum_response", {{"form", "recursive"}, {"taps", "1.0"}}},
        {"noise_response", {{"form", "recursive"}, {"taps", "1.0"}}},
        {"detector", {{"highpass_cutoff_bins", "0"}, {"reference_segment_len", "4096"}}},
        {"adc", {{"bits", "16"}, {"gain", "1000"}, {"digitization_table", ""}}},
        {"characterization",
         {{"segment_len", "4096"},
          {"overlap", "0.5"},
          {"window", "hann"},
          {"zero_below_bin", "0"},
          {"floor_fraction", "1e-6"},
          {"allow_degenerate", "false"},
          {"bootstrap_resamples", "1000"},
          {"bootstrap_groups", "64"},
          {"bootstrap_seed", "1"},
          {"shot_noise_threshold", "0.05"},
          {"electronic_variance", "0"},
          {"wavelength_m", "850e-9"},
          {"power_meter_systematic", "0.05"}}},
        {"model",
         {{"eta", ""},
          {"g_chi0", ""},
          {"range_R", ""},
          {"bins_d", ""},
          {"log2_P", ""},
          {"n_total", ""},
          {"n_in_range", ""},
          {"b_adc", ""}}},
        {"epsilon",
         {{"eps_param", "1e-10"},
          {"eps_adc", "6e-5"},
          {"eps_hash", "1e-17"},
          {"eps_seed", ""},
          {"eps_eta", ""},
          {"eps_gain", ""},
          {"eps_P", ""}}},
        {"extractor", {{"k", "1680"}, {"l", "7872"}, {"stripe_width", "64"}, {"input_rate_gbps", "16"}}},
    };
    return kSchema;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::string s = text;
    for (char& c : s) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(s);
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        double v;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc() || ptr != token.data() + token.size()) {
            throw ConfigError(what + ": '" + token + "' is not a number");
        }
        out.push_back(v);
    }
    return out;
}

PathFilter parse_filter(const PipelineConfig& cfg, const std::string& section) {
    PathFilter f;
    const std::string& form = cfg.get(section, "form");
    if (form == "recursive") {
        f.form = FilterForm::recursive;
    } else if (form == "fir") {
        f.form = FilterForm::fir;
    } else {
        throw ConfigError(section + ".form must be recursive or fir");
    }
    f.taps = parse_list(cfg.get(section, "taps"), section + ".taps");
    return f;
}

// A '#' or ';' preceded by whitespace starts a trailing comment.
std::string strip_inline_comment(const std::string& value) {
    std::size_t cut = value.size();
    for (std::size_t i = 1; i < value.size(); ++i) {
        if ((value[i] == '#' || value[i] == ';') && std::isspace(static_cast<unsigned char>(value[i - 1]))) {
            cut = i;
            break;
        }
    }
    std::size_t end = cut;
    while (end > 0 && std::isspace(static_cast<unsigned char>(value[end - 1]))) --end;
    return value.substr(0, end);
}

}  // namespace

PipelineConfig::PipelineConfig() : values_(schema()) {}

PipelineConfig PipelineConfig::parse(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    PipelineConfig cfg;
    for (const auto& [section, body] : tree) {
        if (!body.data().empty()) {
            throw ConfigError("config key '" + section + "' outside of a section");
        }
        if (!cfg.values_.contains(section)) {
            throw ConfigError("unknown config section [" + section + "]");
        }
        for (const auto& [key, value] : body) {
            cfg.set(section, key, strip_inline_comment(value.data()));
        }
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path);
    }
    return parse(in);
}

void PipelineConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    auto sec = values_.find(section);
    if (sec == values_.end()) {
        throw ConfigError("unknown config section [" + section + "]");
    }
    auto it = sec->second.find(key);
    if (it == sec->second.end()) {
        throw ConfigError("unknown config key '" + key + "' in [" + section + "]");
    }
    it->second = value;
}

bool PipelineConfig::has(const std::string& section, const std::string& key) const {
    return !get(section, key).empty();
}

const std::string& PipelineConfig::get(const std::string& section, const std::string& key) const {
    const auto sec = values_.find(section);
    if (sec == values_.end() || sec->second.find(key) == sec->second.end()) {
        throw ConfigError("no config key " + section + "." + key);
    }
    return sec->second.at(key);
}

double PipelineConfig::get_double(const std::string& section, const std::string& key) const {
    const std::string& text = get(section, key);
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(section + "." + key + " = '" + text + "' is not a number");
    }
}

long long PipelineConfig::get_int(const std::string& section, const std::string& key) const {
    const std::string& text = get(section, key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError(section + "." + key + " = '" + text + "' is not an integer");
    }
    return v;
}

std::optional<double> PipelineConfig::get_optional_double(const std::string& section, const std::string& key) const {
    if (!has(section, key)) {
        return std::nullopt;
    }
    return get_double(section, key);
}

std::string PipelineConfig::to_ini() const {
    std::ostringstream os;
    for (const auto& [section, body] : values_) {
        os << '[' << section << "]\n";
        for (const auto& [key, value] : body) {
            os << key << " = " << value << '\n';
        }
        os << '\n';
    }
    return os.str();
}

GeneratorConfig PipelineConfig::generator() const {
    GeneratorConfig g;
    g.eta = get_double("simulation", "eta");
    g.paths = simulation_paths_from_string(get("simulation", "paths"));

    g.noise.kind = noise_kind_from_string(get("noise", "kind"));
    g.noise.variance = get_double("noise", "variance");
    if (g.noise.kind == NoiseKind::mixture) {
        // "weight:mean:stddev, ..."
        std::string text = get("noise", "components");
        for (char& c : text) {
            if (c == ':') c = ' ';
        }
        const auto flat = parse_list(text, "noise.components");
        if (flat.empty() || flat.size() % 3 != 0) {
            throw ConfigError("noise.components must be a list of weight:mean:stddev triples");
        }
        for (std::size_t i = 0; i < flat.size(); i += 3) {
            g.noise.components.push_back({flat[i], flat[i + 1], flat[i + 2]});
        }
    }
    if (g.noise.kind == NoiseKind::file_replay) {
        if (!has("noise", "replay_file")) {
            throw ConfigError("file-replay noise needs noise.replay_file");
        }
        g.noise.replay = load_replay_samples(get("noise", "replay_file"));
    }

    g.response.vacuum = parse_filter(*this, "vacuum_response");
    g.response.noise = parse_filter(*this, "noise_response");
    g.response.highpass_cutoff_bins = static_cast<int>(get_int("detector", "highpass_cutoff_bins"));
    g.response.reference_segment_len = static_cast<int>(get_int("detector", "reference_segment_len"));

    const long long bits = get_int("adc", "bits");
    if (bits < 1 || bits > 16) {
        throw ConfigError("adc.bits must lie in 1..16");
    }
    g.adc.geometry = AdcGeometry::from_bits(static_cast<int>(bits));
    g.adc.gain_g = get_double("adc", "gain");
    if (has("adc", "digitization_table")) {
        try {
            g.adc.error_model = DigitizationErrorModel::load_csv(get("adc", "digitization_table"),
                                                                 static_cast<std::uint32_t>(g.adc.geometry.bins_d));
        } catch (const FormatError& e) {
            throw ConfigError(e.what());
        }
    }
    g.validate();
    return g;
}

WelchOptions PipelineConfig::welch() const {
    WelchOptions w;
    w.segment_len = static_cast<std::size_t>(get_int("characterization", "segment_len"));
    w.overlap = get_double("characterization", "overlap");
    const std::string& window = get("characterization", "window");
    if (window == "hann") {
        w.window = WindowKind::hann;
    } else if (window == "rectangular") {
        w.window = WindowKind::rectangular;
    } else {
        throw ConfigError("characterization.window must be hann or rectangular");
    }
    w.bootstrap_groups = static_cast<std::size_t>(get_int("characterization", "bootstrap_groups"));
    return w;
}

VacuumOptions PipelineConfig::vacuum() const {
    VacuumOptions v;
    v.floor_fraction = get_double("characterization", "floor_fraction");
    const std::string& allow = get("characterization", "allow_degenerate");
    if (allow != "true" && allow != "false") {
        throw ConfigError("characterization.allow_degenerate must be true or false");
    }
    v.allow_degenerate = allow == "true";
    if (!(v.floor_fraction > 0.0)) {
        throw ConfigError("characterization.floor_fraction must be positive");
    }
    return v;
}

BootstrapOptions PipelineConfig::bootstrap() const {
    BootstrapOptions b;
    b.resamples = static_cast<std::size_t>(get_int("characterization", "bootstrap_resamples"));
    b.seed = static_cast<std::uint64_t>(get_int("characterization", "bootstrap_seed"));
    b.eps = param_split().gain;
    return b;
}

EpsilonBudget PipelineConfig::epsilons() const {
    EpsilonBudget e;
    e.eps_param = get_double("epsilon", "eps_param");
    e.eps_adc = get_double("epsilon", "eps_adc");
    e.eps_hash = get_double("epsilon", "eps_hash");
    try {
        e.validate();
    } catch (const std::domain_error& err) {
        throw ConfigError(err.what());
    }
    return e;
}

PipelineConfig::ParamSplit PipelineConfig::param_split() const {
    const double third = get_double("epsilon", "eps_param") / 3.0;
    ParamSplit s;
    s.eta = get_optional_double("epsilon", "eps_eta").value_or(third);
    s.gain = get_optional_double("epsilon", "eps_gain").value_or(third);
    s.in_range = get_optional_double("epsilon", "eps_P").value_or(third);
    return s;
}

ExtractorConfig PipelineConfig::extractor() const {
    ExtractorConfig x;
    const long long k = get_int("extractor", "k");
    const long long l = get_int("extractor", "l");
    const long long stripe = get_int("extractor", "stripe_width");
    if (k <= 0 || l <= 0 || stripe <= 0) {
        throw ConfigError("extractor geometry must be positive");
    }
    x.k = static_cast<std::size_t>(k);
    x.l = static_cast<std::size_t>(l);
    x.column_stripe_width = static_cast<std::size_t>(stripe);
    x.eps_hash = get_double("epsilon", "eps_hash");
    try {
        x.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return x;
}

}  // namespace vqrng
