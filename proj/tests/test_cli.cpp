#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pfscale/bench/harness.hpp"
#include "pfscale/cli/cli.hpp"
#include "pfscale/sparsekit/matrix_io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace pfscale;
using nlohmann::json;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    Outcome o;
    o.code = cli::run_cli(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

class TempDir {
  public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                fmt::format("pfscale_cli_{}_{}", ::getpid(), counter.fetch_add(1));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string operator/(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

  private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

/// Ten rows per size with t = f(n) and a small deterministic spread.
void write_synthetic(const std::string& path, std::string_view subject,
                     const std::vector<double>& sizes, double (*f)(double), double spread = 0.0) {
    std::ofstream os(path);
    bench::write_samples_header(os);
    pfscale::Rng rng(77);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        for (int r = 0; r < 10; ++r) {
            bench::BenchSample s;
            s.case_id = fmt::format("{}-{:03}", subject, k);
            s.subject = *bench::parse_subject(subject);
            s.n = static_cast<std::int64_t>(sizes[k]);
            s.nnz = 3 * s.n;
            s.run_index = r;
            s.t_seconds = f(sizes[k]) * (1.0 + spread * rng.uniform(-1.0, 1.0));
            bench::write_sample(os, s);
        }
    }
}

std::vector<double> log_sizes(double lo, double hi, int count) {
    std::vector<double> v;
    for (int k = 0; k < count; ++k) {
        v.push_back(std::round(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1))));
    }
    return v;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t c = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) {
        ++c;
    }
    return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"--help"}).code == cli::kExitOk);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"bench", "--bogus"}).code == cli::kExitUsage);
    TempDir dir;
    const auto no_subject = run({"--out-dir", dir.str(), "bench"});
    CHECK(no_subject.code == cli::kExitUsage);
    CHECK(no_subject.err.find("--subject") != std::string::npos);
    CHECK(run({"--out-dir", dir.str(), "bench", "--subject", "newton"}).code == cli::kExitUsage);
    CHECK(run({"--out-dir", dir.str(), "bench", "--subject", "ybus", "--sizes", "10-20"}).code ==
          cli::kExitUsage);
    const auto missing = run({"--out-dir", dir.str(), "fit", "--samples", dir / "none.csv"});
    CHECK(missing.code == cli::kExitFailure);
    CHECK(missing.err.find("none.csv") != std::string::npos);
}

TEST_CASE("generate with a zero count writes an empty manifest") {
    TempDir dir;
    const auto r = run({"--out-dir", dir.str(), "generate", "--count", "0"});
    CHECK(r.code == cli::kExitOk);
    CHECK(slurp(dir / "manifest.csv") == "file,m,n,nnz,equivalent_p\n");
}

TEST_CASE("generate is reproducible and sorted by size") {
    TempDir a;
    TempDir b;
    const std::vector<std::string> tail{"generate", "--sizes", "200..2000", "--count", "4"};
    auto args_a = std::vector<std::string>{"--seed", "5", "--out-dir", a.str()};
    auto args_b = std::vector<std::string>{"--seed", "5", "--out-dir", b.str()};
    args_a.insert(args_a.end(), tail.begin(), tail.end());
    args_b.insert(args_b.end(), tail.begin(), tail.end());
    REQUIRE(run(args_a).code == cli::kExitOk);
    REQUIRE(run(args_b).code == cli::kExitOk);
    CHECK(slurp(a / "manifest.csv") == slurp(b / "manifest.csv"));
    for (int k = 0; k < 4; ++k) {
        const auto name = fmt::format("net_{:03}.json", k);
        CHECK(slurp(a / name) == slurp(b / name));
    }
    std::istringstream manifest(slurp(a / "manifest.csv"));
    std::string line;
    std::getline(manifest, line);
    long previous = 0;
    int rows = 0;
    while (std::getline(manifest, line)) {
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            f.push_back(cell);
        }
        REQUIRE(f.size() == 5);
        const long n = std::stol(f[2]);
        CHECK(n >= previous);
        previous = n;
        ++rows;
    }
    CHECK(rows == 4);

    TempDir j;
    REQUIRE(run({"--out-dir", j.str(), "--format", "json", "generate", "--sizes", "200..400",
                 "--count", "2"})
                .code == cli::kExitOk);
    CHECK(json::parse(slurp(j / "manifest.json")).size() == 2);
}

TEST_CASE("bench over a generated manifest") {
    TempDir dir;
    REQUIRE(run({"--out-dir", dir.str(), "generate", "--sizes", "100..300", "--count", "2"}).code ==
            cli::kExitOk);
    const auto r = run({"--out-dir", dir.str(), "bench", "--subject", "ybus", "--networks",
                        dir / "manifest.csv", "--reps", "3"});
    CHECK(r.code == cli::kExitOk);
    std::istringstream csv(slurp(dir / "samples.csv"));
    const auto rows = bench::read_samples(csv);
    CHECK(rows.size() == 6);
    const auto meta = json::parse(slurp(dir / "samples.csv.meta.json"));
    CHECK(meta["rows"] == 6);
    CHECK(meta["failed_cases"].empty());
}

TEST_CASE("a failed case sets exit code 2 and still writes its row") {
    TempDir dir;
    const auto r = run({"--out-dir", dir.str(), "bench", "--subject", "upsilon", "--sizes", "1..1",
                        "--points", "1"});
    CHECK(r.code == cli::kExitFailure);
    CHECK(r.err.find("failed: upsilon-000") != std::string::npos);
    std::istringstream csv(slurp(dir / "samples.csv"));
    const auto rows = bench::read_samples(csv);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].failed);
}

TEST_CASE("the load step fills the iteration column") {
    TempDir dir;
    const auto r = run({"--out-dir", dir.str(), "bench", "--subject", "fixed-point", "--sizes",
                        "200..600", "--points", "2", "--reps", "2", "--step", "0.6:0.3"});
    REQUIRE(r.code == cli::kExitOk);
    std::istringstream csv(slurp(dir / "samples.csv"));
    const auto rows = bench::read_samples(csv);
    REQUIRE(rows.size() == 4);
    for (const auto& s : rows) {
        CHECK(s.iterations >= 2);
    }
    const auto meta = json::parse(slurp(dir / "samples.csv.meta.json"));
    CHECK(meta["campaign"]["step"][0] == 0.6);
    CHECK(meta["campaign"]["step"][1] == 0.3);
}

TEST_CASE("fit of an exact linear law") {
    TempDir dir;
    write_synthetic(dir / "s.csv", "ybus", log_sizes(300, 100000, 15), [](double n) { return 1e-6 * n; });
    const auto r = run({"--out-dir", dir.str(), "fit", "--samples", dir / "s.csv"});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("1.000") != std::string::npos);
    const auto report = json::parse(slurp(dir / "fit_report.json"));
    CHECK(report["ybus"]["alpha"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report["ybus"]["r2"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fs::exists(dir / "fit_summary.csv"));
    CHECK(fs::exists(dir / "fit_summary.txt"));

    // the report can be re-rendered without the samples
    TempDir again;
    const auto from_report =
        run({"--out-dir", again.str(), "fit", "--report", dir / "fit_report.json"});
    CHECK(from_report.code == cli::kExitOk);
    CHECK(slurp(again / "fit_summary.txt") == slurp(dir / "fit_summary.txt"));
}

TEST_CASE("slightly superlinear data rejects both 1 and 3") {
    TempDir dir;
    write_synthetic(
        dir / "s.csv", "fixed-point", log_sizes(300, 100000, 15),
        [](double n) { return 2e-7 * std::pow(n, 1.068); }, 0.02);
    const auto r =
        run({"--out-dir", dir.str(), "--format", "json", "fit", "--samples", dir / "s.csv"});
    REQUIRE(r.code == cli::kExitOk);
    const auto report = json::parse(slurp(dir / "fit_report.json"))["fixed-point"];
    CHECK(report["alpha"].get<double>() == doctest::Approx(1.068).epsilon(0.01));
    CHECK(report["reject_alpha_1"] == true);
    CHECK(report["reject_alpha_3"] == true);
    CHECK(report["iterations_slope_per_decade"].get<double>() == 0.0);
}

TEST_CASE("curved data warns that the power law is only locally valid") {
    TempDir dir;
    write_synthetic(dir / "s.csv", "upsilon", log_sizes(3000, 30000, 11), [](double n) {
        const double x = std::log10(n);
        return std::pow(10.0, -10.0 + 2.0 * x + 0.6 * (x - 3.5) * (x - 3.5));
    });
    const auto r = run({"--out-dir", dir.str(), "fit", "--samples", dir / "s.csv"});
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.out.find("power law only locally valid") != std::string::npos);
    const auto report = json::parse(slurp(dir / "fit_report.json"))["upsilon"];
    CHECK(report["warning"] == "power law only locally valid");

    TempDir straight;
    write_synthetic(straight / "s.csv", "upsilon", log_sizes(3000, 30000, 11),
                    [](double n) { return 1e-10 * n * n; });
    const auto plain = run({"--out-dir", straight.str(), "fit", "--samples", straight / "s.csv"});
    CHECK(plain.out.find("locally valid") == std::string::npos);
}

TEST_CASE("fit needs three usable sizes") {
    TempDir dir;
    write_synthetic(dir / "s.csv", "ybus", {100, 200}, [](double n) { return n; });
    CHECK(run({"--out-dir", dir.str(), "fit", "--samples", dir / "s.csv"}).code ==
          cli::kExitFailure);
}

TEST_CASE("spy of a 2x2 identity") {
    TempDir dir;
    sparse::save_matrix_market(dir / "eye.mtx", sparse::SparseMatrix<sparse::Complex>::identity(2));
    const auto r = run({"--out-dir", dir.str(), "plot", "spy", "--matrix", dir / "eye.mtx"});
    REQUIRE(r.code == cli::kExitOk);
    const std::string svg = slurp(dir / "spy.svg");
    CHECK(svg.find("nnz = 2") != std::string::npos);
    const auto first = svg;
    REQUIRE(run({"--out-dir", dir.str(), "plot", "spy", "--matrix", dir / "eye.mtx"}).code ==
            cli::kExitOk);
    CHECK(slurp(dir / "spy.svg") == first);
    CHECK(run({"--out-dir", dir.str(), "plot", "spy"}).code == cli::kExitUsage);
    CHECK(run({"--out-dir", dir.str(), "plot", "spy", "--upsilon", "50"}).code == cli::kExitOk);
    CHECK(run({"--out-dir", dir.str(), "plot", "spy", "--network",
               testing::fixture("ieee34_like.json")})
              .code == cli::kExitOk);
    CHECK(slurp(dir / "spy.svg").find("nnz = 804") != std::string::npos);
}

TEST_CASE("scatter of an exact power law lies on the fit line") {
    TempDir dir;
    write_synthetic(dir / "s.csv", "ybus", log_sizes(300, 100000, 15),
                    [](double n) { return 3e-8 * std::pow(n, 1.2); });
    REQUIRE(run({"--out-dir", dir.str(), "plot", "scatter", "--samples", dir / "s.csv"}).code ==
            cli::kExitOk);
    const std::string svg = slurp(dir / "scatter.svg");
    CHECK(svg.find("alpha = 1.200") != std::string::npos);

    const std::regex line_re(
        "class=\"fit\" x1=\"([-0-9.]+)\" y1=\"([-0-9.]+)\" x2=\"([-0-9.]+)\" y2=\"([-0-9.]+)\"");
    std::smatch m;
    REQUIRE(std::regex_search(svg, m, line_re));
    const double x1 = std::stod(m[1]), y1 = std::stod(m[2]);
    const double x2 = std::stod(m[3]), y2 = std::stod(m[4]);

    const std::regex circle_re("<circle cx=\"([-0-9.]+)\" cy=\"([-0-9.]+)\" r=\"3\"/>");
    int points = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), circle_re);
         it != std::sregex_iterator(); ++it) {
        const double cx = std::stod((*it)[1]);
        const double cy = std::stod((*it)[2]);
        const double on_line = y1 + (y2 - y1) * (cx - x1) / (x2 - x1);
        CHECK(std::abs(cy - on_line) < 0.05);  // coordinates are printed to 0.01 px
        ++points;
    }
    CHECK(points == 15);

    // byte-stable output
    const std::string first = svg;
    REQUIRE(run({"--out-dir", dir.str(), "plot", "scatter", "--samples", dir / "s.csv"}).code ==
            cli::kExitOk);
    CHECK(slurp(dir / "scatter.svg") == first);
}

TEST_CASE("iterations plot") {
    TempDir dir;
    write_synthetic(dir / "s.csv", "fixed-point", log_sizes(300, 3000, 4), [](double n) { return n; });
    const auto r = run({"--out-dir", dir.str(), "plot", "iterations", "--samples", dir / "s.csv"});
    REQUIRE(r.code == cli::kExitOk);
    const std::string svg = slurp(dir / "iterations.svg");
    CHECK(svg.find("median iterations") != std::string::npos);
    CHECK(count_of(svg, "r=\"3\"/>") == 4);  // the legend marker carries its own fill
    CHECK(run({"--out-dir", dir.str(), "plot", "iterations"}).code == cli::kExitUsage);
}

}  // TEST_SUITE
