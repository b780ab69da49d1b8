// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "vqrng/digitization.hpp"
#include "vqrng/entropy_model.hpp"
#include "vqrng/errors.hpp"
#include "vqrng/pipeline.hpp"
#include "vqrng/report.hpp"
#include "vqrng/signal_simulator.hpp"
#include "vqrng/spectral.hpp"
#include "vqrng/theory.hpp"
#include "vqrng/toeplitz.hpp"

using namespace vqrng;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::uint8_t> b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1);
    return b;
}

ModelParams table_params() {
    ModelParams p;
    p.eta = 0.81;
    p.g_chi0 = 2581.0;
    p.adc = AdcGeometry::from_bits(16);
    p.log2_P = in_range_bound(1000000000ULL, 1000000000ULL, 1e-10).log2_P;
    p.b_adc = 7.80;
    return p;
}

EntropyReport table_report() {
    return make_entropy_report(table_params(), EpsilonBudget{}, 7872, 16);
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "vqrng_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// 1
void table_replay(Outcome& o) {
    const AdcEntropy e = min_entropy_adc(table_params());
    o.detail << std::setprecision(6) << "hmin_adc " << e.perfect_adc << ", hmin_final " << e.bits << ' ';
    o.require(std::abs(e.perfect_adc - 11.47) <= 0.01, "hmin_adc = 11.47 +- 0.01");
    o.require(std::abs(e.bits - 3.67) <= 0.01, "hmin_final = 3.67 +- 0.01");
    o.require(std::abs(e.bits - oracle::kFinalBound) < 1e-6, "final bound matches the extended-precision value");
}

// 2
void hash_gating(Outcome& o) {
    const std::uint64_t k = extractable_length(7872, 3.67, 16, 1e-17);
    o.detail << "extractable_length " << k << ' ';
    o.require(k == 1693, "extractable_length = 1693");
    ChaCha20Rng rng(2);
    EntropyReport r;
    r.hmin_final = 3.67;
    ExtractorConfig cfg;
    cfg.k = 1680;
    bool accepted = true;
    try {
        BlockExtractor ex(cfg, r, ToeplitzSeed::from_rng(1680, 7872, rng));
    } catch (const BudgetRefused&) {
        accepted = false;
    }
    o.require(accepted, "k = 1680 accepted");
    cfg.k = 1694;
    bool refused = false;
    try {
        BlockExtractor ex(cfg, r, ToeplitzSeed::from_rng(1694, 7872, rng));
    } catch (const BudgetRefused&) {
        refused = true;
    }
    o.require(refused, "k = 1694 refused");
}

// 3
void rate_and_speed(Outcome& o, const fs::path& dir) {
    PipelineConfig cfg;
    cfg.set("adc", "gain", "2581");
    cmd_simulate(cfg, 200000, 3, (dir / "rate.vrq").string());
    ChaCha20Rng rng(3);
    ToeplitzSeed::from_rng(1680, 7872, rng).save((dir / "rate.seed").string());
    const ExtractSummary s =
        cmd_extract(cfg, table_report(), (dir / "rate.vrq").string(), (dir / "rate.seed").string(),
                    (dir / "rate.bin").string());
    std::ostringstream printed;
    print_extract_summary(printed, s);
    o.detail << std::setprecision(6) << "output_rate_gbps " << s.output_rate_gbps << ' ';
    o.require(std::abs(s.output_rate_gbps - 3.414) < 0.001, "k/l * 16 Gb/s = 3.414");
    o.require(printed.str().find("3.414") != std::string::npos, "rate printed by the extract summary");

    // Stream hasher on 1e8 input bits against the naive GF(2) product.
    std::mt19937_64 mt(31);
    const ToeplitzSeed seed(1680, 7872, random_bits(mt, 1680 + 7871));
    ToeplitzHasher hasher(seed);
    const std::size_t blocks = (100000000 + 7871) / 7872;
    std::vector<std::uint64_t> words(7872 / 64);
    for (auto& w : words) w = mt();
    const auto t0 = Clock::now();
    std::uint64_t sink = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        words[b % words.size()] ^= b;
        sink += hasher.hash(words)[0];
    }
    const double stream_s = seconds_since(t0);
    const auto bits = unpack_bits(words, 7872);
    const std::size_t naive_blocks = 20;
    const auto t1 = Clock::now();
    for (std::size_t b = 0; b < naive_blocks; ++b) sink += toeplitz_hash_naive(seed, bits)[b % 1680];
    const double naive_s = seconds_since(t1);
    const double speedup = (naive_s / naive_blocks) / (stream_s / static_cast<double>(blocks));
    o.detail << std::setprecision(4) << "stream " << stream_s << " s for 1e8 bits, speedup " << speedup << "x "
             << (sink == 0xFFFFFFFFFFFFFFFFULL ? " " : "");
    o.require(stream_s < 60.0, "1e8 bits in under 60 s");
    o.require(speedup >= 50.0, "stream at least 50x faster than naive");
}

// 4
void hoeffding(Outcome& o) {
    const InRangeBound b = in_range_bound(1000000000ULL, 1000000000ULL, 1e-10);
    o.detail << std::setprecision(12) << "P >= " << b.p_lower << ' ';
    o.require(b.p_lower >= 1.0 - 1.08e-4, "P >= 1 - 1.08e-4");
    o.require(std::abs(b.p_lower - oracle::kHoeffdingLowerP) < 1e-10, "matches the closed form");
}

// 5
void estimator_soundness(Outcome& o) {
    const std::array<double, 3> truths{500.0, 2581.0, 5000.0};
    const double eta = 0.8;
    constexpr int trials = 100;
    const std::uint64_t n = 10000000;
    int below = 0;
    double worst_rel = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double truth = truths[t % truths.size()];
        GeneratorConfig g;
        g.eta = eta;
        g.adc.gain_g = truth;  // chi_0 = 1
        g.response.vacuum.taps = {1.0, 0.5};
        g.response.noise.taps = {1.0, -0.3};
        g.noise.variance = 0.1;
        GeneratorConfig e = g;
        e.paths = SimulationPaths::excess_only;
        const auto total = psd_welch(generate_stream(g, n, 5000 + t));
        const auto elec = psd_welch(generate_stream(e, n, 9000 + t));
        BootstrapOptions bo;
        bo.seed = 1 + t;
        const GainEstimate est = gain_bandwidth_bootstrap(total, &elec, eta, 0, {}, bo);
        const double truth_gc = oracle::true_g_chi0(truth, 1.0);
        worst_rel = std::max(worst_rel, std::abs(est.point - truth_gc) / truth_gc);
        if (est.lower < truth_gc) ++below;
    }
    o.detail << std::setprecision(4) << "worst point error " << 100.0 * worst_rel << "%, lower < truth in " << below
             << "/" << trials << ' ';
    o.require(worst_rel <= 0.02, "every point estimate within 2%");
    o.require(below >= 99, "lower bound below truth in >= 99 of 100 trials");
}

// 6
void oracle_equivalence(Outcome& o) {
    std::mt19937_64 rng(6);
    int mismatches = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto bits = random_bits(rng, 1680 + 7871);
        const auto in = random_bits(rng, 7872);
        if (toeplitz_hash_stream(ToeplitzSeed(1680, 7872, bits), pack_bits(in)) !=
            oracle::toeplitz_dense(bits, 1680, 7872, in)) {
            ++mismatches;
        }
    }
    int small = 0;
    for (int t = 0; t < 2000; ++t) {
        const std::size_t stripe = 64 * (1 + rng() % 2);
        const std::size_t l = stripe * (1 + rng() % 6);
        const std::size_t k = 1 + rng() % std::min<std::size_t>(200, l);
        const auto bits = random_bits(rng, k + l - 1);
        const auto in = random_bits(rng, l);
        if (toeplitz_hash_stream(ToeplitzSeed(k, l, bits), pack_bits(in), stripe) !=
            oracle::toeplitz_dense(bits, k, l, in)) {
            ++mismatches;
        }
        ++small;
    }
    o.detail << "1000 pairs at (1680, 7872) and " << small << " small geometries, " << mismatches << " mismatches ";
    o.require(mismatches == 0, "stream equals the dense GF(2) oracle");
}

// 7
void digitization_brute_force(Outcome& o) {
    std::mt19937_64 rng(7);
    int checked = 0;
    int mismatches = 0;
    for (std::uint32_t d = 2; d <= 256; ++d) {
        for (int t = 0; t < 8; ++t) {
            std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> reach(d);
            std::vector<std::vector<CodeInterval>> sets(d);
            const std::uint32_t width = 1 + static_cast<std::uint32_t>(rng() % 16);
            for (std::uint32_t j = 0; j < d; ++j) {
                const int pieces = 1 + static_cast<int>(rng() % 3);
                for (int p = 0; p < pieces; ++p) {
                    const std::uint32_t lo = static_cast<std::uint32_t>(rng() % d);
                    const std::uint32_t hi = std::min<std::uint32_t>(d - 1, lo + static_cast<std::uint32_t>(rng() % width));
                    reach[j].push_back({lo, hi});
                    sets[j].push_back({lo, hi});
                }
            }
            const DigitizationErrorModel m(std::move(sets));
            const auto brute = oracle::brute_force_max_preimage(reach);
            if (m.max_preimage_size() != brute ||
                std::abs(adc_digitization_penalty(m) - std::log2(static_cast<double>(brute))) > 1e-12) {
                ++mismatches;
            }
            ++checked;
        }
    }
    const double smear = adc_digitization_penalty(DigitizationErrorModel::smear(256, 1));
    o.detail << checked << " random models, " << mismatches << " mismatches, smear-1 penalty " << std::setprecision(15)
             << smear << ' ';
    o.require(mismatches == 0, "penalty equals exhaustive inversion");
    o.require(std::abs(smear - std::log2(3.0)) < 1e-12, "smear +-1 gives log2 3");
}

// 8
void theory_curves(Outcome& o) {
    std::vector<double> etas;
    for (int i = 1; i <= 99; ++i) etas.push_back(i / 100.0);
    std::map<int, std::vector<double>> a;
    for (const auto& p : fig2a_curve(etas, {8, 12, 16}, 5.0)) a[p.bits].push_back(p.hmin);
    bool decreasing = true;
    bool ordered = true;
    for (auto& [bits, c] : a) {
        for (std::size_t i = 1; i < c.size(); ++i) decreasing &= c[i] < c[i - 1];
    }
    for (std::size_t i = 0; i < etas.size(); ++i) ordered &= a[8][i] < a[12][i] && a[12][i] < a[16][i];
    std::vector<double> db;
    for (int i = 0; i <= 60; ++i) db.push_back(0.5 * i);
    std::map<int, std::vector<double>> b;
    for (const auto& p : fig2b_curve(db, {8, 12, 16}, 0.8, 6.0)) b[p.bits].push_back(p.hmin);
    bool non_increasing = true;
    for (auto& [bits, c] : b) {
        for (std::size_t i = 1; i < c.size(); ++i) non_increasing &= c[i] <= c[i - 1] + 1e-12;
    }
    o.detail << "fig2a 3x" << etas.size() << " points, fig2b 3x" << db.size() << " points ";
    o.require(decreasing, "fig2a strictly decreasing in eta");
    o.require(ordered, "fig2a ordered by ADC depth");
    o.require(non_increasing, "fig2b non-increasing in excess noise");
}

// 9
void non_gaussian(Outcome& o, const fs::path& dir) {
    const double truth = 2581.0;
    for (const char* kind : {"laplace", "uniform", "mixture"}) {
        PipelineConfig cfg;
        cfg.set("simulation", "eta", "0.8");
        cfg.set("adc", "gain", "2581");
        cfg.set("vacuum_response", "taps", "1.0, 0.5");
        cfg.set("noise_response", "taps", "1.0, -0.3");
        cfg.set("noise", "kind", kind);
        cfg.set("noise", "variance", "0.1");
        cfg.set("noise", "components", "0.5:-1:0.3, 0.5:1:0.3");
        const std::string total = (dir / (std::string(kind) + "_total.vrq")).string();
        const std::string elec = (dir / (std::string(kind) + "_elec.vrq")).string();
        cmd_simulate(cfg, 10000000, 11, total);
        PipelineConfig ecfg = cfg;
        ecfg.set("simulation", "paths", "excess");
        cmd_simulate(ecfg, 10000000, 12, elec);
        CharacterizeInputs in;
        in.total_block = total;
        in.electronic_block = elec;
        const CharacterizeResult r = cmd_characterize(cfg, in);
        const EntropyReport recomputed =
            make_entropy_report(r.entropy.params, r.entropy.eps, r.entropy.l, r.entropy.bits_per_sample);
        const double err = std::abs(r.gain.point - truth) / truth;
        o.detail << kind << ": g_chi0 " << std::setprecision(6) << r.gain.point << ", hmin_final "
                 << r.entropy.hmin_final << "; ";
        o.require(err <= 0.02, std::string(kind) + " vacuum-path recovery within 2%");
        o.require(r.entropy.params.g_chi0 < truth, std::string(kind) + " certified lower bound below truth");
        o.require(recomputed.hmin_final == r.entropy.hmin_final && recomputed.k == r.entropy.k,
                  std::string(kind) + " budget recomputes from (eta, g_chi0, P, b_adc)");
        o.require(r.entropy.hmin_final > 0.0, std::string(kind) + " positive budget");
    }
}

// 10
void output_sanity(Outcome& o) {
    const std::uint64_t target_bytes = 100ULL * 1000 * 1000;
    GeneratorConfig g;
    g.eta = 0.8;
    g.adc.gain_g = 2581.0;
    g.response.vacuum.taps = {1.0, 0.5};
    g.noise.variance = 0.1;
    SignalGenerator gen(g, 10);
    ExtractorConfig cfg;
    ChaCha20Rng seed_rng(10);
    BlockExtractor ex(cfg, table_report(), ToeplitzSeed::from_rng(cfg.k, cfg.l, seed_rng));
    BitWriter writer;
    std::uint64_t ones = 0;
    std::uint64_t bytes = 0;
    std::array<std::uint64_t, 256> counts{};
    auto drain = [&](const std::vector<std::uint8_t>& chunk) {
        for (std::uint8_t b : chunk) {
            if (bytes == target_bytes) return;
            ++counts[b];
            ones += static_cast<std::uint64_t>(std::popcount(b));
            ++bytes;
        }
    };
    SampleBlock chunk;
    while (bytes < target_bytes) {
        chunk.codes.clear();
        chunk.n_total = chunk.n_out_of_range = 0;
        gen.generate(1 << 20, chunk);
        ex.push(chunk.codes, [&](const RandomOutput& out) { writer.append(out); });
        drain(writer.take_complete());
    }
    const double nbits = 8.0 * static_cast<double>(bytes);
    const double z = (2.0 * static_cast<double>(ones) - nbits) / std::sqrt(nbits);
    const double p_monobit = std::erfc(std::abs(z) / std::sqrt(2.0));
    const double expected = static_cast<double>(bytes) / 256.0;
    double chi2 = 0.0;
    for (auto c : counts) chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    const double p_chi2 = boost::math::gamma_q(255.0 / 2.0, chi2 / 2.0);
    o.detail << bytes << " bytes from " << ex.blocks() << " blocks, monobit p " << std::setprecision(4) << p_monobit
             << ", byte chi2 " << chi2 << " p " << p_chi2 << ' ';
    o.require(bytes == target_bytes, "100 MB produced");
    o.require(p_monobit > 0.001, "monobit at alpha = 0.001");
    o.require(p_chi2 > 0.001, "byte chi-square at alpha = 0.001");
}

}  // namespace

int main() {
    const fs::path dir = scratch_dir();
    struct Criterion {
        int id;
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "entropy budget replay", table_replay},
        {2, "leftover-hash gating", hash_gating},
        {3, "rate arithmetic and stream speed", [&](Outcome& o) { rate_and_speed(o, dir); }},
        {4, "in-range probability bound", hoeffding},
        {5, "gain-bandwidth estimator soundness", estimator_soundness},
        {6, "streaming Toeplitz equals oracle", oracle_equivalence},
        {7, "digitization penalty brute force", digitization_brute_force},
        {8, "theory-curve properties", theory_curves},
        {9, "non-Gaussian excess noise", [&](Outcome& o) { non_gaussian(o, dir); }},
        {10, "extracted-output sanity", output_sanity},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = Clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << c.id << "  " << c.name << "  ("
                  << std::fixed << std::setprecision(1) << seconds_since(t0) << " s)  " << std::defaultfloat
                  << o.detail.str() << std::endl;
        if (!o.pass) ++failed;
    }
    fs::remove_all(dir);
    return failed == 0 ? 0 : 1;
}
