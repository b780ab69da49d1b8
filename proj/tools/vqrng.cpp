// Command-line front end: simulate, characterize, entropy, theory-curves,
// extract, seedgen and selftest. Exit codes: 0 ok, 2 config, 3 not
// shot-noise limited, 4 degenerate vacuum spectrum, 5 entropy budget refused.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "vqrng/config.hpp"
#include "vqrng/errors.hpp"
#include "vqrng/pipeline.hpp"
#include "vqrng/report.hpp"
#include "vqrng/toeplitz.hpp"

namespace {

struct Common {
    std::string config_path;
    std::optional<double> eps_param;
    std::optional<double> eps_hash;
    std::optional<long long> k;
    std::optional<long long> l;
    std::vector<std::string> overrides;  // section.key=value
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "pipeline configuration file");
    cmd->add_option("--eps-param", c.eps_param, "parameter-estimation failure probability");
    cmd->add_option("--eps-hash", c.eps_hash, "extractor distance from uniform");
    cmd->add_option("--k", c.k, "output bits per block");
    cmd->add_option("--l", c.l, "input bits per block");
    cmd->add_option("--set", c.overrides, "override a config value, section.key=value");
}

vqrng::PipelineConfig resolve(const Common& c) {
    vqrng::PipelineConfig cfg = c.config_path.empty() ? vqrng::PipelineConfig() : vqrng::PipelineConfig::load(c.config_path);
    auto number = [](double v) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        return os.str();
    };
    if (c.eps_param) cfg.set("epsilon", "eps_param", number(*c.eps_param));
    if (c.eps_hash) cfg.set("epsilon", "eps_hash", number(*c.eps_hash));
    if (c.k) cfg.set("extractor", "k", std::to_string(*c.k));
    if (c.l) cfg.set("extractor", "l", std::to_string(*c.l));
    for (const std::string& o : c.overrides) {
        const auto dot = o.find('.');
        const auto eq = o.find('=');
        if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
            throw vqrng::ConfigError("--set expects section.key=value, got '" + o + "'");
        }
        cfg.set(o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), o.substr(eq + 1));
    }
    return cfg;
}

void emit_json(const nlohmann::json& doc, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << doc.dump(2) << '\n';
    } else {
        vqrng::save_json(path, doc);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vacuum-fluctuation QRNG entropy pipeline"};
    app.require_subcommand(1);
    Common common;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic ADC sample file");
    add_common(sim, common);
    std::uint64_t n = 1000000;
    std::uint64_t seed = 1;
    std::string out_path;
    std::string paths;
    sim->add_option("--n", n, "number of samples")->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "simulation seed");
    sim->add_option("--out", out_path, "output sample file")->required();
    sim->add_option("--paths", paths, "both, excess or vacuum");

    auto* chr = app.add_subcommand("characterize", "estimate model parameters from sample files");
    add_common(chr, common);
    vqrng::CharacterizeInputs inputs;
    std::string report_path;
    chr->add_option("--total", inputs.total_block, "sample file with the vacuum path present")->required();
    chr->add_option("--electronic", inputs.electronic_block, "sample file of the electronic noise alone");
    chr->add_option("--calibration", inputs.calibration_csv, "responsivity or shot-noise CSV (repeatable)");
    chr->add_option("--psd-dir", inputs.psd_dir, "directory for the PSD CSV files");
    chr->add_option("--out", report_path, "report JSON (default: stdout)");
    bool allow_degenerate = false;
    chr->add_flag("--allow-degenerate", allow_degenerate, "floor a degenerate vacuum spectrum instead of failing");

    auto* ent = app.add_subcommand("entropy", "entropy budget from [model] parameters");
    add_common(ent, common);
    ent->add_option("--out", report_path, "report JSON (default: stdout)");

    auto* thy = app.add_subcommand("theory-curves", "entropy-vs-efficiency or entropy-vs-noise curves");
    std::string mode;
    vqrng::TheoryGrid grid;
    thy->add_option("mode", mode, "fig2a or fig2b")->required()->check(CLI::IsMember({"fig2a", "fig2b"}));
    thy->add_option("--eta-min", grid.eta_min, "first efficiency of the fig2a grid");
    thy->add_option("--eta-max", grid.eta_max, "last efficiency of the fig2a grid");
    thy->add_option("--eta-steps", grid.eta_steps, "number of efficiencies");
    thy->add_option("--excess-db", grid.excess_db, "detected noise above vacuum for fig2a");
    thy->add_option("--db-min", grid.db_min, "first noise level of the fig2b grid, dB above vacuum");
    thy->add_option("--db-max", grid.db_max, "last noise level, dB above vacuum");
    thy->add_option("--db-steps", grid.db_steps, "number of noise levels");
    thy->add_option("--eta", grid.eta, "efficiency for fig2b");
    thy->add_option("--sigmas", grid.sigmas, "standard deviations inside the ADC range for fig2b");
    thy->add_option("--bits", grid.bit_depths, "ADC depths");
    thy->add_option("--out", out_path, "CSV file (default: stdout)");

    auto* ext = app.add_subcommand("extract", "hash certified samples into random bytes");
    add_common(ext, common);
    std::string in_path;
    std::string seed_file;
    ext->add_option("--report", report_path, "entropy report JSON")->required();
    ext->add_option("--in", in_path, "sample file, - for stdin")->required();
    ext->add_option("--seed-file", seed_file, "Toeplitz seed file");
    ext->add_option("--out", out_path, "output bytes, - for stdout")->required();

    auto* sgen = app.add_subcommand("seedgen", "write a Toeplitz seed from the system entropy source (not certified)");
    add_common(sgen, common);
    sgen->add_option("--out", out_path, "seed file")->required();

    auto* self = app.add_subcommand("selftest", "built-in consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : vqrng::exit_code::config_error;
    }

    try {
        if (*sim) {
            vqrng::PipelineConfig cfg = resolve(common);
            if (!paths.empty()) cfg.set("simulation", "paths", paths);
            const auto s = vqrng::cmd_simulate(cfg, n, seed, out_path);
            std::cerr << "samples " << s.n_total << ", out of range " << s.n_out_of_range << ", " << s.file_bytes
                      << " bytes, sha256 " << s.file_sha256 << '\n';
        } else if (*chr) {
            vqrng::PipelineConfig cfg = resolve(common);
            if (allow_degenerate) cfg.set("characterization", "allow_degenerate", "true");
            const auto result = vqrng::cmd_characterize(cfg, inputs);
            emit_json(result.report, report_path);
            if (result.status != vqrng::exit_code::ok) {
                std::cerr << "laser is not shot-noise limited\n";
            }
            return result.status;
        } else if (*ent) {
            const nlohmann::json doc = vqrng::cmd_entropy(resolve(common));
            emit_json(doc, report_path);
            if (!(doc["hmin_final"].get<double>() > 0.0)) {
                std::cerr << "certified min-entropy exhausted\n";
                return vqrng::exit_code::budget_refused;
            }
        } else if (*thy) {
            if (out_path.empty() || out_path == "-") {
                vqrng::cmd_theory_curves(mode, grid, std::cout);
            } else {
                std::ofstream out(out_path);
                if (!out) throw vqrng::ConfigError("cannot write " + out_path);
                vqrng::cmd_theory_curves(mode, grid, out);
            }
        } else if (*ext) {
            const vqrng::PipelineConfig cfg = resolve(common);
            const vqrng::EntropyReport report = vqrng::load_report(report_path);
            const auto s = vqrng::cmd_extract(cfg, report, in_path, seed_file, out_path);
            vqrng::print_extract_summary(out_path == "-" ? std::cerr : std::cout, s);
        } else if (*sgen) {
            const auto x = resolve(common).extractor();
            const auto s = vqrng::ToeplitzSeed::from_system_entropy(x.k, x.l);
            s.save(out_path);
            std::cout << "seed " << x.k << "x" << x.l << " sha256 " << s.digest() << " (" << s.source_tag() << ")\n";
        } else if (*self) {
            bool all = true;
            for (const auto& c : vqrng::selftest()) {
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
                all = all && c.pass;
            }
            return all ? 0 : vqrng::exit_code::failure;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return vqrng::exit_code_for(e);
    }
    return 0;
}
