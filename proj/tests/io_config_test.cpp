#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "htq/config.hpp"
#include "htq/io.hpp"
#include "htq/parallel.hpp"
#include "htq/rng.hpp"
#include "htq/report.hpp"

using namespace htq;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() / "htq_io_test";
        std::filesystem::create_directories(dir_);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::filesystem::path dir_;
};

using IoTest = TempDir;

}  // namespace

TEST_F(IoTest, F32DumpRoundTrip) {
    std::vector<double> values{0.0, 1.5, -2.25, 1e-30, -3.4e38};
    write_f32_dump(path("a.f32"), values);
    auto back = read_f32_dump(path("a.f32"));
    ASSERT_EQ(back.size(), values.size());
    for (size_t i = 0; i < values.size(); ++i)
        EXPECT_EQ(static_cast<float>(back[i]), static_cast<float>(values[i]));
}

TEST_F(IoTest, F32RejectsOddSize) {
    write_file_bytes(path("bad.f32"), std::vector<uint8_t>{1, 2, 3});
    try {
        read_f32_dump(path("bad.f32"));
        FAIL();
    } catch (const HtqError& e) {
        EXPECT_EQ(e.kind(), ErrKind::ParseError);
    }
}

TEST_F(IoTest, CsvDump) {
    write_file_text(path("g.csv"), "0.5\n-1.25\n\n3e-2\n");
    auto values = read_csv_dump(path("g.csv"));
    ASSERT_EQ(values.size(), 3u);
    EXPECT_DOUBLE_EQ(values[0], 0.5);
    EXPECT_DOUBLE_EQ(values[1], -1.25);
    EXPECT_DOUBLE_EQ(values[2], 0.03);

    write_file_text(path("bad.csv"), "1.0\nnot_a_number\n");
    EXPECT_THROW(read_csv_dump(path("bad.csv")), HtqError);
}

TEST_F(IoTest, DumpFormatDetection) {
    std::vector<double> values{1.0, 2.0};
    write_f32_dump(path("x.f32"), values);
    EXPECT_EQ(read_gradient_dump(path("x.f32")).size(), 2u);
    write_file_text(path("x.csv"), "1\n2\n");
    EXPECT_EQ(read_gradient_dump(path("x.csv")).size(), 2u);
    EXPECT_EQ(read_gradient_dump(path("x.csv"), "csv").size(), 2u);
    EXPECT_THROW(read_gradient_dump(path("x.csv"), "parquet"), HtqError);
}

TEST_F(IoTest, TailJsonRoundTripAndValidation) {
    TailFitReport report;
    report.tail = PowerLawTail{4.25, 0.125, 0.0625};
    report.n_tail = 321;
    write_file_text(path("tail.json"), tail_to_json(report).dump(2));
    PowerLawTail back = read_tail_json(path("tail.json"));
    EXPECT_DOUBLE_EQ(back.gamma, 4.25);
    EXPECT_DOUBLE_EQ(back.g_min, 0.125);
    EXPECT_DOUBLE_EQ(back.rho, 0.0625);

    write_file_text(path("bad_tail.json"), "{\"gamma\": 2.0, \"g_min\": 1.0, \"rho\": 0.1}");
    EXPECT_THROW(read_tail_json(path("bad_tail.json")), HtqError);
    write_file_text(path("junk.json"), "not json");
    EXPECT_THROW(read_tail_json(path("junk.json")), HtqError);
}

TEST_F(IoTest, TailJsonDeterministic) {
    TailFitReport report;
    report.tail = PowerLawTail{3.5, 0.01, 0.3};
    report.n_tail = 7;
    EXPECT_EQ(tail_to_json(report).dump(), tail_to_json(report).dump());
    EXPECT_EQ(tail_to_json(report).dump(),
              "{\"gamma\":3.5,\"g_min\":0.01,\"rho\":0.3,\"n_tail\":7}");
}

TEST_F(IoTest, HistogramJsonRoundTrip) {
    std::vector<double> values{0.5, -0.5, 1.0, -1.0, 0.25};
    auto hist = empirical_density(values, 8, true);
    write_file_text(path("h.json"), histogram_to_json(hist).dump());
    auto back = read_histogram_json(path("h.json"));
    EXPECT_EQ(back.edges(), hist.edges());
    EXPECT_EQ(back.mass(), hist.mass());
    EXPECT_EQ(back.symmetric(), hist.symmetric());
}

TEST_F(IoTest, CodebookJsonRoundTrip) {
    Codebook cb = make_uniform_codebook(0.75, 7);
    auto j = codebook_to_json(cb);
    Codebook back = codebook_from_json(j);
    EXPECT_EQ(back.levels, cb.levels);
    EXPECT_EQ(back.bits, cb.bits);
}

TEST(IniConfig, ParsesSectionsAndComments) {
    auto cfg = IniConfig::parse(
        "# header comment\n"
        "[problem]\n"
        "clients = 8\n"
        "eta = 0.05   # inline comment\n"
        "\n"
        "[sim]\n"
        "scheme = tnqsgd\n"
        "flag = true\n");
    EXPECT_EQ(cfg.get_int("problem", "clients", 0), 8);
    EXPECT_DOUBLE_EQ(cfg.get_num("problem", "eta", 0.0), 0.05);
    EXPECT_EQ(cfg.get_str("sim", "scheme", ""), "tnqsgd");
    EXPECT_TRUE(cfg.get_bool("sim", "flag", false));
    EXPECT_EQ(cfg.get_int("problem", "missing", 42), 42);
    EXPECT_FALSE(cfg.has("problem", "missing"));
}

TEST(IniConfig, RejectsMalformedLines) {
    EXPECT_THROW(IniConfig::parse("[unterminated\n"), HtqError);
    EXPECT_THROW(IniConfig::parse("keyvalue\n"), HtqError);
    auto cfg = IniConfig::parse("[a]\nx = abc\n");
    EXPECT_THROW(cfg.get_num("a", "x", 0.0), HtqError);
    EXPECT_THROW(cfg.get_bool("a", "x", false), HtqError);
}

TEST(SimConfigIni, DefaultsParseAndResolve) {
    auto ini = IniConfig::parse(default_sim_config_text());
    SimConfig cfg = sim_config_from_ini(ini);
    EXPECT_EQ(cfg.problem.clients, 8);
    EXPECT_EQ(cfg.problem.dim, 1000);
    EXPECT_EQ(cfg.problem.rounds, 2000);
    EXPECT_EQ(cfg.bits, 3);
    EXPECT_EQ(cfg.scheme, SimScheme::Tqsgd);
    EXPECT_EQ(cfg.loss, LossKind::QuadraticPareto);
    validate_sim_config(cfg);
}

TEST(SimConfigIni, OverridesApply) {
    auto ini = IniConfig::parse(
        "[sim]\nscheme = tbqsgd\nbits = 4\nweights = data\n[loss]\nkind = logistic\n");
    SimConfig cfg = sim_config_from_ini(ini);
    EXPECT_EQ(cfg.scheme, SimScheme::Tbqsgd);
    EXPECT_EQ(cfg.bits, 4);
    EXPECT_EQ(cfg.weights, WeightsMode::DataProportional);
    EXPECT_EQ(cfg.loss, LossKind::LogisticSynthetic);
    EXPECT_THROW(sim_config_from_ini(IniConfig::parse("[sim]\nweights = stochastic\n")), HtqError);
}

TEST(RunChunked, ResultIndependentOfThreadCount) {
    auto work = [](int chunk, uint64_t lo, uint64_t hi) {
        Rng rng(42, "chunk-det", static_cast<uint64_t>(chunk));
        double acc = 0.0;
        for (uint64_t i = lo; i < hi; ++i) acc += rng.u01();
        return acc;
    };
    auto a = run_chunked<double>(100'000, 64, 1, work);
    auto b = run_chunked<double>(100'000, 64, 3, work);
    auto c = run_chunked<double>(100'000, 64, 7, work);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, c);
}
