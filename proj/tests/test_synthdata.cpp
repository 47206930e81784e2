#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bif/synthdata.hpp"

using namespace bif;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string tmpdir() {
    auto d = std::filesystem::temp_directory_path() / "bif_synthdata_test";
    std::filesystem::create_directories(d);
    return d.string();
}

}  // namespace

TEST_CASE("syn ids round trip and dims") {
    for (const auto& s : {"syn1", "syn2", "syn3", "syn4", "syn5", "syn6"})
        CHECK(to_string(syn_from_string(s)) == s);
    CHECK_THROWS_AS(syn_from_string("syn7"), ConfigError);
    CHECK(syn_dim(SynId::syn1) == 10);
    CHECK(syn_dim(SynId::syn3) == 10);
    CHECK(syn_dim(SynId::syn4) == 11);
    CHECK(syn_dim(SynId::syn6) == 11);
}

TEST_CASE("label_probability: syn1 at the origin is one half") {
    std::vector<double> x(10, 0.0);
    x[0] = 0.0;
    x[1] = 0.0;
    CHECK(label_probability(SynId::syn1, x) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("label_probability: syn2 at zero input") {
    std::vector<double> x(10, 0.0);
    // r = exp(-4), p = 1/(1+exp(-4))
    const double want = 1.0 / (1.0 + std::exp(-4.0));
    CHECK(label_probability(SynId::syn2, x) == doctest::Approx(want).epsilon(1e-12));
    CHECK(want == doctest::Approx(0.982).epsilon(1e-3));
}

TEST_CASE("label_probability: syn3 at zero input") {
    std::vector<double> x(10, 0.0);
    // r = exp(0 + 0 + 0 + e^0) = e, p = 1/(1+e)
    CHECK(label_probability(SynId::syn3, x) ==
          doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-12));
}

TEST_CASE("label_probability: overflow guard on the -100 sin term") {
    std::vector<double> x(10, 0.0);
    x[6] = -0.785398163397448;  // sin(2x) = -1 -> +100 in log odds
    const double p = label_probability(SynId::syn3, x);
    CHECK(std::isfinite(p));
    CHECK(p < 1e-30);
    x[6] = 0.785398163397448;  // sin(2x) = +1 -> -100
    CHECK(label_probability(SynId::syn3, x) > 1.0 - 1e-12);
}

TEST_CASE("label_probability: increasing x9 decreases p(y=1) in syn3") {
    std::vector<double> x(10, 0.0);  // keep the sin term off the saturated range
    x[8] = 0.0;
    const double p0 = label_probability(SynId::syn3, x);
    x[8] = 1.0;
    CHECK(label_probability(SynId::syn3, x) < p0);
}

TEST_CASE("label_probability: dimension check") {
    std::vector<double> x(10, 0.0);
    CHECK_THROWS_AS(label_probability(SynId::syn4, x), ShapeError);
}

TEST_CASE("generate: truth masks follow the branch definition") {
    SynSpec spec;
    spec.id = SynId::syn4;
    spec.n = 2000;
    spec.seed = 13;
    const auto d = generate(spec);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto x = d.row(i);
        const auto m = d.truth_row(i);
        CHECK(m[10] == 1);  // switch included by default
        if (x[10] < 0.0) {
            CHECK(m[0] == 1);
            CHECK(m[1] == 1);
            CHECK(m[2] == 0);
        } else {
            CHECK(m[0] == 0);
            CHECK(m[2] == 1);
            CHECK(m[5] == 1);
        }
    }
}

TEST_CASE("generate: switch_in_truth flag excludes feature 11") {
    SynSpec spec;
    spec.id = SynId::syn5;
    spec.n = 50;
    spec.switch_in_truth = false;
    const auto d = generate(spec);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.truth_row(i)[10] == 0);
}

TEST_CASE("generate: empirical label mean tracks label_probability") {
    SynSpec spec;
    spec.id = SynId::syn1;
    spec.n = 100000;
    spec.seed = 21;
    const auto d = generate(spec);
    double label_mean = 0.0, p_mean = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        label_mean += d.labels[i];
        p_mean += label_probability(SynId::syn1, d.row(i));
    }
    label_mean /= d.size();
    p_mean /= d.size();
    CHECK(std::fabs(label_mean - p_mean) < 0.01);
}

TEST_CASE("generate: feature marginals near standard normal") {
    SynSpec spec;
    spec.id = SynId::syn2;
    spec.n = 100000;
    spec.seed = 4;
    const auto d = generate(spec);
    for (std::size_t j = 0; j < d.dim; ++j) {
        double m = 0.0, v = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) m += d.features[i * d.dim + j];
        m /= d.size();
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double c = d.features[i * d.dim + j] - m;
            v += c * c;
        }
        v /= d.size();
        CHECK(std::fabs(m) < 0.02);
        CHECK(std::fabs(v - 1.0) < 0.05);
    }
}

TEST_CASE("generate: syn4 branch balance") {
    SynSpec spec;
    spec.id = SynId::syn4;
    spec.n = 100000;
    spec.seed = 5;
    const auto d = generate(spec);
    std::size_t neg = 0;
    for (std::size_t i = 0; i < d.size(); ++i) neg += d.row(i)[10] < 0.0;
    CHECK(std::fabs(static_cast<double>(neg) / d.size() - 0.5) < 0.01);
}

TEST_CASE("generate: determinism and split bookkeeping") {
    SynSpec spec;
    spec.id = SynId::syn3;
    spec.n = 1000;
    spec.seed = 99;
    const auto a = generate(spec);
    const auto b = generate(spec);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(a.truth == b.truth);
    CHECK(a.train_count == 800);
    CHECK(a.test_count() == 200);
    CHECK(dataset_fingerprint(a) == dataset_fingerprint(b));
}

TEST_CASE("csv round trip preserves the dataset exactly") {
    SynSpec spec;
    spec.id = SynId::syn4;
    spec.n = 120;
    spec.seed = 3;
    const auto d = generate(spec);
    const auto dir = tmpdir();
    const auto fp = dir + "/f.csv", tp = dir + "/t.csv";
    write_dataset_csv(d, fp, tp);
    const auto back = read_dataset_csv(fp, tp, spec.train_fraction);
    CHECK(back.dim == d.dim);
    CHECK(back.features == d.features);  // %.17g round-trips doubles exactly
    CHECK(back.labels == d.labels);
    CHECK(back.truth == d.truth);
    CHECK(back.train_count == d.train_count);

    // rewriting produces byte-identical files
    const auto first = slurp(fp);
    write_dataset_csv(d, fp, tp);
    CHECK(slurp(fp) == first);
}

TEST_CASE("read_dataset_csv: malformed inputs") {
    const auto dir = tmpdir();
    {
        std::ofstream f(dir + "/bad_header.csv");
        f << "x1,x2\n0.1,0.2\n";
    }
    CHECK_THROWS_AS(read_dataset_csv(dir + "/bad_header.csv", "", 0.8), FormatError);
    {
        std::ofstream f(dir + "/short_row.csv");
        f << "x1,x2,y\n0.1,0.2,1\n0.3\n";
    }
    CHECK_THROWS_AS(read_dataset_csv(dir + "/short_row.csv", "", 0.8), FormatError);
    CHECK_THROWS_AS(read_dataset_csv(dir + "/does_not_exist.csv", "", 0.8), InputError);
}

TEST_CASE("generate: n must be positive") {
    SynSpec spec;
    spec.n = 0;
    CHECK_THROWS_AS(generate(spec), InputError);
}
