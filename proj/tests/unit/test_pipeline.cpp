#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "vqrng/config.hpp"
#include "vqrng/errors.hpp"
#include "vqrng/pipeline.hpp"
#include "vqrng/report.hpp"
#include "vqrng/toeplitz.hpp"

using namespace vqrng;
namespace fs = std::filesystem;

namespace {

PipelineConfig parse(const std::string& text) {
    std::istringstream in(text);
    return PipelineConfig::parse(in);
}

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("vqrng_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST(Config, DefaultsAndComments) {
    const auto c = parse("# leading comment\n[simulation]\neta = 0.7 ; trailing\n; another\n[adc]\nbits = 12\n");
    EXPECT_DOUBLE_EQ(c.get_double("simulation", "eta"), 0.7);
    EXPECT_EQ(c.get_int("adc", "bits"), 12);
    EXPECT_DOUBLE_EQ(c.get_double("adc", "gain"), 1000.0);
    EXPECT_EQ(c.get("characterization", "window"), "hann");
    EXPECT_FALSE(c.has("model", "g_chi0"));
    const auto g = c.generator();
    EXPECT_DOUBLE_EQ(g.eta, 0.7);
    EXPECT_EQ(g.adc.geometry.bins_d, 4096u);
}

TEST(Config, RejectsUnknownNames) {
    EXPECT_THROW(parse("[simulation]\netaa = 0.7\n"), ConfigError);
    EXPECT_THROW(parse("[simulations]\neta = 0.7\n"), ConfigError);
    EXPECT_THROW(parse("eta = 0.7\n"), ConfigError);
    PipelineConfig c;
    EXPECT_THROW(c.set("adc", "gian", "3"), ConfigError);
}

TEST(Config, RejectsMalformedValues) {
    EXPECT_THROW(parse("[adc]\ngain = 12abc\n").generator(), ConfigError);
    EXPECT_THROW(parse("[vacuum_response]\ntaps = 1, x\n").generator(), ConfigError);
    EXPECT_THROW(parse("[noise]\nkind = pink\n").generator(), ConfigError);
    EXPECT_THROW(parse("[vacuum_response]\ntaps = 1, 1.5\n").generator().validate(), ConfigError);
}

TEST(Config, ResolvedIniRoundTrip) {
    const auto c = parse("[noise]\nkind = mixture\ncomponents = 0.3:-1:0.5, 0.7:0.4:1\n[extractor]\nk = 1000\n");
    const auto back = parse(c.to_ini());
    EXPECT_EQ(back.sections(), c.sections());
    const auto g = back.generator();
    ASSERT_EQ(g.noise.components.size(), 2u);
    EXPECT_DOUBLE_EQ(g.noise.components[0].mean, -1.0);
    EXPECT_EQ(back.extractor().k, 1000u);
}

TEST(Config, ParamSplit) {
    PipelineConfig c;
    auto s = c.param_split();
    EXPECT_DOUBLE_EQ(s.eta + s.gain + s.in_range, 1e-10);
    c.set("epsilon", "eps_P", "1e-12");
    EXPECT_DOUBLE_EQ(c.param_split().in_range, 1e-12);
}

TEST(Report, JsonRoundTrip) {
    ModelParams p;
    p.eta = 0.81;
    p.g_chi0 = 2581.0;
    p.adc = AdcGeometry::from_bits(16);
    p.log2_P = -1.5e-4;
    p.b_adc = 7.8;
    const EntropyReport r = make_entropy_report(p, {}, 7872, 16);
    const auto doc = report_to_json(r);
    for (const char* f : {"eta", "g_chi0", "range_R", "bins_d", "log2_P", "b_adc", "hmin_ideal", "hmin_adc",
                          "hmin_final", "k", "l", "eps_param", "eps_adc", "eps_hash"}) {
        EXPECT_TRUE(doc.contains(f)) << f;
    }
    const EntropyReport back = report_from_json(nlohmann::json::parse(doc.dump()));
    EXPECT_EQ(back.params.g_chi0, r.params.g_chi0);
    EXPECT_EQ(back.hmin_final, r.hmin_final);
    EXPECT_EQ(back.k, r.k);
    EXPECT_EQ(back.l, 7872u);
    auto broken = doc;
    broken.erase("hmin_final");
    EXPECT_THROW(report_from_json(broken), FormatError);
}

TEST(Report, InfiniteValuesAsNull) {
    ModelParams p;
    p.eta = 0.8;
    p.g_chi0 = 100.0;
    p.adc = AdcGeometry::from_bits(16);
    p.log2_P = -std::numeric_limits<double>::infinity();
    const EntropyReport r = make_entropy_report(p, {}, 7872, 16);
    const auto doc = report_to_json(r);
    EXPECT_TRUE(doc["log2_P"].is_null());
    EXPECT_EQ(doc["hmin_final"].get<double>(), 0.0);
    const auto back = report_from_json(doc);
    EXPECT_TRUE(std::isinf(back.params.log2_P));
}

TEST(ExitCodes, Mapping) {
    EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
    EXPECT_EQ(exit_code_for(FormatError("x")), 2);
    EXPECT_EQ(exit_code_for(DegenerateSpectrum("x")), 4);
    EXPECT_EQ(exit_code_for(BudgetRefused("x")), 5);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}

TEST(Entropy, ReferenceBudgetFromModelSection) {
    const auto c = parse("[model]\neta = 0.81\ng_chi0 = 2581\nn_total = 1000000000\nn_in_range = 1000000000\n"
                         "b_adc = 7.80\n[epsilon]\neps_P = 1e-10\n");
    EntropyReport r;
    const auto doc = cmd_entropy(c, &r);
    EXPECT_NEAR(r.hmin_adc, 11.47, 0.01);
    EXPECT_NEAR(r.hmin_final, 3.67, 0.01);
    EXPECT_NEAR(r.hmin_final, oracle::kFinalBound, 1e-6);
    EXPECT_NEAR(r.hmin_ideal, oracle::kIdealBound, 1e-6);
    EXPECT_EQ(doc["k"].get<std::uint64_t>(), r.k);
    EXPECT_THROW(cmd_entropy(PipelineConfig{}), ConfigError);
}

TEST(TheoryCurves, CsvShape) {
    TheoryGrid g;
    g.eta_steps = 5;
    std::ostringstream a;
    EXPECT_EQ(cmd_theory_curves("fig2a", g, a), 15u);
    EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "eta,bits,gain,hmin");
    std::ostringstream b;
    g.db_steps = 4;
    EXPECT_EQ(cmd_theory_curves("fig2b", g, b), 12u);
    EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "excess_db,bits,gain,hmin");
    std::ostringstream c;
    EXPECT_THROW(cmd_theory_curves("fig3", g, c), ConfigError);
}

TEST(Selftest, AllCasesPass) {
    for (const auto& c : selftest()) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
}

TEST_F(TempDir, SimulateCharacterizeExtract) {
    auto c = parse("[simulation]\neta = 0.8\n[vacuum_response]\ntaps = 0.8, 0.5\n[noise_response]\ntaps = 0.6, 0.3\n"
                   "[adc]\ngain = 1000\n[characterization]\nbootstrap_resamples = 200\n");
    const auto s = cmd_simulate(c, 2000000, 1, path("total.vrq"));
    EXPECT_EQ(s.file_bytes, 64 + 2 * (s.n_total - s.n_out_of_range));
    auto e = c;
    e.set("simulation", "paths", "excess");
    cmd_simulate(e, 2000000, 2, path("electronic.vrq"));

    CharacterizeInputs in;
    in.total_block = path("total.vrq");
    in.electronic_block = path("electronic.vrq");
    in.psd_dir = path("psd");
    const auto r = cmd_characterize(c, in);
    EXPECT_EQ(r.status, exit_code::ok);
    EXPECT_NEAR(r.gain.point, 800.0, 0.02 * 800.0);
    EXPECT_LT(r.entropy.params.g_chi0, 800.0);
    EXPECT_GT(r.entropy.hmin_final, 9.0);
    for (const char* f : {"psd_total.csv", "psd_electronic.csv", "psd_vacuum.csv"}) {
        EXPECT_TRUE(fs::exists(dir_ / "psd" / f)) << f;
    }
    EXPECT_TRUE(r.report.contains("config"));
    save_json(path("report.json"), r.report);

    const EntropyReport rep = load_report(path("report.json"));
    EXPECT_EQ(rep.k, r.entropy.k);
    const auto ex = c.extractor();
    ChaCha20Rng rng(5);
    ToeplitzSeed::from_rng(ex.k, ex.l, rng).save(path("seed.bin"));
    const auto sum = cmd_extract(c, rep, path("total.vrq"), path("seed.bin"), path("out.bin"));
    const std::uint64_t codes = s.n_total - s.n_out_of_range;
    EXPECT_EQ(sum.blocks, codes / (ex.l / 16));
    EXPECT_EQ(sum.output_bits, sum.blocks * ex.k);
    EXPECT_EQ(fs::file_size(path("out.bin")), sum.output_bits / 8);
    EXPECT_NEAR(sum.output_rate_gbps, 3.414, 0.001);

    // Budget and seed failures.
    auto greedy = c;
    greedy.set("extractor", "k", std::to_string(r.entropy.k + 1));
    EXPECT_THROW(cmd_extract(greedy, rep, path("total.vrq"), path("seed.bin"), path("o2.bin")), BudgetRefused);
    EXPECT_THROW(cmd_extract(c, rep, path("total.vrq"), path("missing.bin"), path("o3.bin")), ConfigError);
}

TEST_F(TempDir, DegenerateAndNonLinearCalibration) {
    PipelineConfig c;
    c.set("characterization", "bootstrap_resamples", "50");
    cmd_simulate(c, 300000, 1, path("a.vrq"));
    CharacterizeInputs in;
    in.total_block = path("a.vrq");
    in.electronic_block = path("a.vrq");
    EXPECT_THROW(cmd_characterize(c, in), DegenerateSpectrum);

    {
        std::ofstream csv(path("shot.csv"));
        csv << "power_W,variance\n0.5,0.5125\n1,1.05\n2,2.2\n4,4.8\n";
    }
    auto e = c;
    e.set("simulation", "paths", "excess");
    cmd_simulate(e, 300000, 2, path("b.vrq"));
    in.electronic_block = path("b.vrq");
    in.calibration_csv = {path("shot.csv")};
    EXPECT_EQ(cmd_characterize(c, in).status, exit_code::not_shot_limited);
}

TEST_F(TempDir, ResponsivityCalibrationSetsEta) {
    PipelineConfig c;
    c.set("characterization", "bootstrap_resamples", "50");
    cmd_simulate(c, 300000, 1, path("t.vrq"));
    auto e = c;
    e.set("simulation", "paths", "excess");
    cmd_simulate(e, 300000, 2, path("e.vrq"));
    {
        std::ofstream csv(path("resp.csv"));
        const double k = oracle::kResponsivity0796;
        csv << "power_W,current_A\n";
        for (double p : {1e-3, 2e-3, 3e-3, 4e-3}) csv << p << ',' << k * p * (1.0 + 0.001 * (p * 1e3 - 2.5)) << '\n';
    }
    CharacterizeInputs in;
    in.total_block = path("t.vrq");
    in.electronic_block = path("e.vrq");
    in.calibration_csv = {path("resp.csv")};
    const auto r = cmd_characterize(c, in);
    ASSERT_TRUE(r.efficiency.has_value());
    EXPECT_GT(r.entropy.params.eta, 0.796);
    EXPECT_EQ(r.entropy.params.eta, r.efficiency->upper);
}

TEST_F(TempDir, EstimatorLowerBoundIsSound) {
    // Random stable responses, efficiencies and gains with the excess noise
    // below the vacuum level; the certified lower endpoint must not exceed
    // the true g chi_0.
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int sound = 0;
    for (int t = 0; t < 20; ++t) {
        PipelineConfig c;
        const double eta = 0.5 + 0.35 * u(rng);
        const double gain = 100.0 + 1900.0 * u(rng);
        const double chi0 = 0.5 + 0.5 * u(rng);
        const double a = -0.6 + 1.2 * u(rng);
        const double b = -0.6 + 1.2 * u(rng);
        c.set("simulation", "eta", std::to_string(eta));
        c.set("adc", "gain", std::to_string(gain));
        c.set("noise", "variance", std::to_string(0.01 + 0.19 * u(rng)));
        c.set("vacuum_response", "taps", std::to_string(chi0) + ", " + std::to_string(a));
        c.set("noise_response", "taps", "1.0, " + std::to_string(b));
        c.set("characterization", "bootstrap_resamples", "200");
        cmd_simulate(c, 1 << 21, 100 + t, path("t.vrq"));
        auto e = c;
        e.set("simulation", "paths", "excess");
        cmd_simulate(e, 1 << 21, 200 + t, path("e.vrq"));
        CharacterizeInputs in;
        in.total_block = path("t.vrq");
        in.electronic_block = path("e.vrq");
        const auto r = cmd_characterize(c, in);
        const double truth = oracle::true_g_chi0(gain, chi0);
        if (r.entropy.params.g_chi0 < truth) ++sound;
        EXPECT_NEAR(r.gain.point, truth, 0.05 * truth) << t;
    }
    EXPECT_EQ(sound, 20);
}
