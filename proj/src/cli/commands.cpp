#include "pfscale/cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "pfscale/bench/harness.hpp"
#include "pfscale/cli/plots.hpp"
#include "pfscale/netmodel/generator.hpp"
#include "pfscale/netmodel/network_io.hpp"
#include "pfscale/regression/medians.hpp"
#include "pfscale/sparsekit/matrix_io.hpp"
#include "pfscale/ybus/upsilon.hpp"
#include "pfscale/ybus/ybus.hpp"

namespace pfscale::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Runtime failure with exit code 2.
class Failure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Global {
    std::uint64_t seed = 1;
    fs::path out_dir = ".";
    std::string format = "csv";
};

std::pair<double, double> parse_pair(const std::string& text, const std::string& sep,
                                     const char* flag) {
    const auto pos = text.find(sep);
    if (pos == std::string::npos) {
        throw CLI::ValidationError(flag, fmt::format("expected A{}B, got '{}'", sep, text));
    }
    try {
        std::size_t used = 0;
        const double a = std::stod(text.substr(0, pos), &used);
        const std::string rest = text.substr(pos + sep.size());
        std::size_t used_b = 0;
        const double b = std::stod(rest, &used_b);
        if (used != pos || used_b != rest.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return {a, b};
    } catch (const std::logic_error&) {
        throw CLI::ValidationError(flag, fmt::format("expected A{}B, got '{}'", sep, text));
    }
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw Failure(fmt::format("cannot write '{}'", path.string()));
    }
    os << content;
}

std::vector<bench::BenchSample> read_sample_files(const std::vector<fs::path>& files) {
    std::vector<bench::BenchSample> all;
    for (const auto& f : files) {
        std::ifstream is(f);
        if (!is) {
            throw Failure(fmt::format("cannot open samples '{}'", f.string()));
        }
        auto part = bench::read_samples(is);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

/// Case medians grouped by subject, in first-appearance order.
std::vector<std::pair<bench::Subject, std::vector<reg::CaseMedian>>> medians_by_subject(
    const std::vector<bench::BenchSample>& samples, const std::vector<std::string>& only) {
    std::vector<std::pair<bench::Subject, std::vector<reg::CaseMedian>>> groups;
    for (const reg::CaseMedian& m : reg::median_per_case(samples)) {
        const std::string name(bench::to_string(m.subject));
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) {
            continue;
        }
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == m.subject; });
        if (it == groups.end()) {
            groups.emplace_back(m.subject, std::vector<reg::CaseMedian>{});
            it = groups.end() - 1;
        }
        it->second.push_back(m);
    }
    return groups;
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
    std::string sizes = "300..100000";
    int count = 15;
    std::vector<double> phase_mix;
    double rating_factor = net::ImpedanceProfile{}.rating_factor;
    std::string uniform_phases;
};

int cmd_generate(const GenerateArgs& a, const Global& g, std::ostream& out) {
    const auto [lo, hi] = parse_pair(a.sizes, "..", "--sizes");
    if (a.count < 0) {
        throw CLI::ValidationError("--count", "must be non-negative");
    }
    bench::SizeGrid grid{lo, hi, a.count};
    const auto sizes = grid.values();
    net::GeneratorSpec base;
    if (!a.phase_mix.empty()) {
        if (a.phase_mix.size() != 3) {
            throw CLI::ValidationError("--phase-mix", "expected three fractions: three,two,one");
        }
        base.phase_mix = {a.phase_mix[0], a.phase_mix[1], a.phase_mix[2]};
    }
    base.impedance.rating_factor = a.rating_factor;
    if (!a.uniform_phases.empty()) {
        base.uniform_phases = net::PhaseSet::parse(a.uniform_phases);
    }

    struct Row {
        std::string file;
        std::int32_t m;
        std::int64_t n;
        std::int64_t nnz;
        double p;
    };
    std::vector<std::pair<net::Network, Row>> built;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        net::GeneratorSpec spec = base;
        spec.seed = g.seed * 1000003ULL + k;
        spec.m = base.uniform_phases
                     ? std::max<std::int32_t>(2, static_cast<std::int32_t>(std::llround(
                                                     static_cast<double>(sizes[k]) /
                                                     base.uniform_phases->size())))
                     : net::buses_for_nodes(static_cast<std::int32_t>(sizes[k]), base.phase_mix);
        net::Network network = net::generate_radial(spec);
        const auto sys = ybus::assemble(network);
        Row row{{}, network.bus_count(), sys.n(), sys.y_full.nnz(),
                ybus::equivalent_p(sys.y_full, sys.n())};
        built.emplace_back(std::move(network), row);
    }
    std::stable_sort(built.begin(), built.end(),
                     [](const auto& x, const auto& y) { return x.second.n < y.second.n; });

    fs::create_directories(g.out_dir);
    json manifest = json::array();
    std::string csv = "file,m,n,nnz,equivalent_p\n";
    for (std::size_t k = 0; k < built.size(); ++k) {
        Row& row = built[k].second;
        row.file = fmt::format("net_{:03}.json", k);
        net::save_network(built[k].first, g.out_dir / row.file);
        csv += fmt::format("{},{},{},{},{:.6f}\n", row.file, row.m, row.n, row.nnz, row.p);
        manifest.push_back(
            {{"file", row.file}, {"m", row.m}, {"n", row.n}, {"nnz", row.nnz}, {"equivalent_p", row.p}});
    }
    if (g.format == "json") {
        write_file(g.out_dir / "manifest.json", manifest.dump(2) + "\n");
    } else {
        write_file(g.out_dir / "manifest.csv", csv);
    }
    fmt::print(out, "wrote {} network(s) to {}\n", built.size(), g.out_dir.string());
    return kExitOk;
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
    std::string spec_file;
    std::vector<std::string> subjects;
    std::string sizes;
    int points = -1;
    double p = -1.0;
    std::string step;
    int reps = -1;
    int warmup = -1;
    double tol = -1.0;
    std::vector<std::string> networks;
    std::string out_file;
};

std::vector<fs::path> expand_networks(const std::vector<std::string>& items) {
    std::vector<fs::path> files;
    for (const auto& item : items) {
        const fs::path path(item);
        if (!fs::exists(path)) {
            throw Failure(fmt::format("network input '{}' does not exist", item));
        }
        if (path.extension() == ".csv") {
            std::ifstream is(path);
            std::string line;
            std::getline(is, line);  // header
            while (std::getline(is, line)) {
                if (!line.empty()) {
                    files.push_back(path.parent_path() / line.substr(0, line.find(',')));
                }
            }
        } else if (path.extension() == ".json" && path.filename() == "manifest.json") {
            std::ifstream is(path);
            for (const auto& row : json::parse(is)) {
                files.push_back(path.parent_path() / row.at("file").get<std::string>());
            }
        } else {
            files.push_back(path);
        }
    }
    for (const auto& f : files) {
        if (!fs::exists(f)) {
            throw Failure(fmt::format("network file '{}' does not exist", f.string()));
        }
    }
    return files;
}

int cmd_bench(const BenchArgs& a, const Global& g, bool seed_given, std::ostream& out,
              std::ostream& err) {
    bench::CampaignSpec spec;
    if (!a.spec_file.empty()) {
        spec = bench::load_campaign(a.spec_file);
    } else if (a.subjects.empty()) {
        throw CLI::ValidationError("--subject", "give --subject or --spec");
    }
    if (!a.subjects.empty()) {
        spec.subjects.clear();
        for (const auto& s : a.subjects) {
            const auto subject = bench::parse_subject(s);
            if (!subject) {
                throw CLI::ValidationError("--subject", fmt::format("unknown subject '{}'", s));
            }
            spec.subjects.push_back(*subject);
        }
    }
    if (!a.sizes.empty()) {
        std::tie(spec.sizes.min, spec.sizes.max) = parse_pair(a.sizes, "..", "--sizes");
    }
    if (a.points >= 0) {
        spec.sizes.count = a.points;
    }
    if (a.p >= 0.0) {
        spec.params.p = a.p;
    }
    if (!a.step.empty()) {
        std::tie(spec.params.load_from, spec.params.load_to) = parse_pair(a.step, ":", "--step");
    }
    if (a.reps >= 0) {
        spec.run.repetitions = a.reps;
    }
    if (a.warmup >= 0) {
        spec.run.warmup = a.warmup;
    }
    if (a.tol > 0.0) {
        spec.params.tol = a.tol;
    }
    if (seed_given || a.spec_file.empty()) {
        spec.seed = g.seed;
    }
    if (!a.networks.empty()) {
        spec.networks = expand_networks(a.networks);
    }
    spec.sizes.values();

    const fs::path out_path = a.out_file.empty() ? g.out_dir / "samples.csv" : fs::path(a.out_file);
    if (out_path.has_parent_path()) {
        fs::create_directories(out_path.parent_path());
    }
    std::ofstream csv(out_path, std::ios::binary);
    if (!csv) {
        throw Failure(fmt::format("cannot write '{}'", out_path.string()));
    }
    bench::write_samples_header(csv);
    std::size_t rows = 0;
    std::string last_case;
    const auto summary = bench::run_campaign(spec, [&](const bench::BenchSample& s) {
        bench::write_sample(csv, s);
        csv.flush();
        ++rows;
        if (s.case_id != last_case) {
            last_case = s.case_id;
            fmt::print(err, "{} n={} nnz={}{}\n", s.case_id, s.n, s.nnz, s.failed ? " FAILED" : "");
        }
    });

    json meta = {{"cases", summary.cases},
                 {"rows", rows},
                 {"inner_loop_cases", summary.inner_loop_cases},
                 {"failed_cases", summary.failed_cases},
                 {"inner_loop_count", spec.run.inner_loop_count},
                 {"campaign", bench::to_json(spec)}};
    write_file(fs::path(out_path.string() + ".meta.json"), meta.dump(2) + "\n");
    if (!summary.inner_loop_cases.empty()) {
        fmt::print(err, "note: {} case(s) timed with an inner loop of {}: {}\n",
                   summary.inner_loop_cases.size(), spec.run.inner_loop_count,
                   fmt::join(summary.inner_loop_cases, ", "));
    }
    for (const auto& f : summary.failed_cases) {
        fmt::print(err, "failed: {}\n", f);
    }
    fmt::print(out, "wrote {} sample row(s) for {} case(s) to {}\n", rows, summary.cases,
               out_path.string());
    return summary.failed_cases.empty() ? kExitOk : kExitFailure;
}

// ---- fit --------------------------------------------------------------------

struct FitArgs {
    std::vector<std::string> samples;
    std::string report;
    std::vector<std::string> subjects;
};

json report_entry(const reg::FitReport& r) {
    json j = reg::to_json(r);
    j["reject_alpha_1"] = reg::hypothesis_excluded(r, 1.0);
    j["reject_alpha_3"] = reg::hypothesis_excluded(r, 3.0);
    return j;
}

int cmd_fit(const FitArgs& a, const Global& g, std::ostream& out) {
    std::vector<reg::SummaryRow> rows;
    std::vector<std::string> warnings;
    json doc = json::object();

    if (!a.report.empty()) {
        std::ifstream is(a.report);
        if (!is) {
            throw Failure(fmt::format("cannot open report '{}'", a.report));
        }
        const json in = json::parse(is);
        if (in.contains("alpha")) {
            rows.push_back({"report", reg::fit_report_from_json(in)});
        } else {
            for (const auto& [label, r] : in.items()) {
                rows.push_back({label, reg::fit_report_from_json(r)});
            }
        }
    } else {
        if (a.samples.empty()) {
            throw CLI::ValidationError("--samples", "give --samples or --report");
        }
        std::vector<fs::path> files(a.samples.begin(), a.samples.end());
        const auto groups = medians_by_subject(read_sample_files(files), a.subjects);
        if (groups.empty()) {
            throw Failure("no usable cases in the samples");
        }
        for (const auto& [subject, medians] : groups) {
            const std::string label(bench::to_string(subject));
            if (medians.size() < 3) {
                throw Failure(fmt::format("{}: {} usable case(s), at least 3 are needed", label,
                                          medians.size()));
            }
            const auto points = reg::to_points(medians);
            reg::FitReport r = reg::fit_loglog(points);
            rows.push_back({label, r});
            json entry = report_entry(r);
            if (bench::per_iteration(subject)) {
                std::vector<reg::Point> it;
                double worst = 0.0;
                for (const auto& m : medians) {
                    it.push_back({static_cast<double>(m.n), m.iterations_median});
                    worst = std::max(worst, m.iterations_median);
                }
                entry["iterations_slope_per_decade"] = reg::slope_per_decade(it);
                entry["iterations_median_max"] = worst;
            }
            if (reg::locally_valid_only(r)) {
                warnings.push_back(fmt::format(
                    "warning: {}: power law only locally valid (windowed slopes span {:.2f})",
                    label, reg::slope_spread(r.windows)));
                entry["warning"] = "power law only locally valid";
            }
            doc[label] = std::move(entry);
        }
    }
    if (doc.empty()) {
        for (const auto& r : rows) {
            doc[r.label] = report_entry(r.report);
        }
    }

    fs::create_directories(g.out_dir);
    write_file(g.out_dir / "fit_report.json", doc.dump(2) + "\n");
    std::ostringstream text;
    reg::write_summary_text(text, rows);
    std::ostringstream csv;
    reg::write_summary_csv(csv, rows);
    write_file(g.out_dir / "fit_summary.txt", text.str());
    write_file(g.out_dir / "fit_summary.csv", csv.str());

    if (g.format == "json") {
        out << doc.dump(2) << "\n";
    } else {
        out << text.str();
    }
    for (const auto& w : warnings) {
        out << w << "\n";
    }
    return kExitOk;
}

// ---- plot -------------------------------------------------------------------

struct PlotArgs {
    std::string kind;
    std::vector<std::string> samples;
    std::vector<std::string> subjects;
    std::string matrix;
    std::string network;
    int upsilon_n = 0;
    double p = 2.0;
    std::string title;
    std::string out_file;
};

int cmd_plot(const PlotArgs& a, const Global& g, std::ostream& out) {
    const fs::path path =
        a.out_file.empty() ? g.out_dir / fmt::format("{}.svg", a.kind) : fs::path(a.out_file);
    std::string svg;
    if (a.kind == "spy") {
        sparse::SpyStyle style;
        style.title = a.title;
        const int given = int(!a.matrix.empty()) + int(!a.network.empty()) + int(a.upsilon_n > 0);
        if (given != 1) {
            throw CLI::ValidationError("spy", "give exactly one of --matrix, --network, --upsilon");
        }
        if (!a.matrix.empty()) {
            std::ifstream is(a.matrix);
            if (!is) {
                throw Failure(fmt::format("cannot open matrix '{}'", a.matrix));
            }
            svg = sparse::spy_svg(sparse::read_matrix_market<sparse::Complex>(is), style);
        } else if (!a.network.empty()) {
            svg = sparse::spy_svg(ybus::assemble(net::load_network(a.network)).y_full, style);
        } else {
            ybus::UpsilonSpec spec;
            spec.n = a.upsilon_n;
            spec.p = a.p;
            spec.seed = g.seed;
            svg = sparse::spy_svg(ybus::generate_upsilon(spec), style);
        }
    } else {
        if (a.samples.empty()) {
            throw CLI::ValidationError("--samples", "required for scatter and iterations plots");
        }
        std::vector<fs::path> files(a.samples.begin(), a.samples.end());
        const auto groups = medians_by_subject(read_sample_files(files), a.subjects);
        std::vector<Series> series;
        for (const auto& [subject, medians] : groups) {
            Series s{std::string(bench::to_string(subject)), {}};
            for (const auto& m : medians) {
                s.points.push_back({static_cast<double>(m.n),
                                    a.kind == "scatter" ? m.t_median : m.iterations_median});
            }
            series.push_back(std::move(s));
        }
        AxisLabels labels;
        labels.title = a.title;
        if (a.kind == "scatter") {
            std::optional<reg::FitReport> fit;
            if (series.size() == 1 && series[0].points.size() >= 3) {
                fit = reg::fit_loglog(series[0].points);
            }
            svg = scatter_fit_svg(series, fit, labels);
        } else {
            labels.y = "median iterations";
            svg = iterations_svg(series, labels);
        }
    }
    write_file(path, svg);
    fmt::print(out, "wrote {}\n", path.string());
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse power-flow scaling benchmarks", "pfscale"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--format", g.format, "Tabular output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate radial networks and a manifest");
    generate->add_option("--sizes", gen.sizes, "Node-count range LO..HI")->capture_default_str();
    generate->add_option("--count", gen.count, "Number of networks")->capture_default_str();
    generate->add_option("--phase-mix", gen.phase_mix, "Fractions of 3,2,1-phase buses")
        ->delimiter(',')
        ->expected(3);
    generate->add_option("--rating-factor", gen.rating_factor, "Branch rating over downstream load")
        ->capture_default_str();
    generate->add_option("--uniform-phases", gen.uniform_phases,
                         "Give every bus these phases, e.g. abc");

    BenchArgs bch;
    auto* benchc = app.add_subcommand("bench", "Run a timing campaign and write sample CSV");
    benchc->add_option("--spec", bch.spec_file, "Campaign spec JSON");
    benchc->add_option("--subject", bch.subjects,
                       "fixed-point, const-admittance, implicit-jacobian, ybus or upsilon");
    benchc->add_option("--sizes", bch.sizes, "Size range LO..HI");
    benchc->add_option("--points", bch.points, "Number of log-spaced sizes");
    benchc->add_option("--p", bch.p, "Equivalent phases for upsilon matrices");
    benchc->add_option("--step", bch.step, "Load step FROM:TO for fixed-point");
    benchc->add_option("--reps", bch.reps, "Timed runs per case");
    benchc->add_option("--warmup", bch.warmup, "Discarded runs per case");
    benchc->add_option("--tol", bch.tol, "Fixed-point tolerance");
    benchc->add_option("--networks", bch.networks, "Network files or a generate manifest");
    benchc->add_option("--out", bch.out_file, "Sample CSV path (default OUT_DIR/samples.csv)");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit log-log complexity coefficients");
    fit->add_option("--samples", fa.samples, "Sample CSV file(s)");
    fit->add_option("--report", fa.report, "Existing fit report JSON instead of samples");
    fit->add_option("--subject", fa.subjects, "Restrict to these subjects");

    PlotArgs pa;
    auto* plot = app.add_subcommand("plot", "Write SVG plots");
    plot->add_option("kind", pa.kind, "scatter, iterations or spy")
        ->required()
        ->check(CLI::IsMember({"scatter", "iterations", "spy"}));
    plot->add_option("--samples", pa.samples, "Sample CSV file(s)");
    plot->add_option("--subject", pa.subjects, "Restrict to these subjects");
    plot->add_option("--matrix", pa.matrix, "Matrix Market file (spy)");
    plot->add_option("--network", pa.network, "Network JSON (spy of its Ybus)");
    plot->add_option("--upsilon", pa.upsilon_n, "Upsilon dimension (spy)");
    plot->add_option("--p", pa.p, "Upsilon equivalent phases")->capture_default_str();
    plot->add_option("--title", pa.title, "Plot title");
    plot->add_option("--out", pa.out_file, "SVG path (default OUT_DIR/KIND.svg)");

    std::vector<std::string> argv_store{"pfscale"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store) {
        argv.push_back(s.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitUsage;
    }

    try {
        if (*generate) {
            return cmd_generate(gen, g, out);
        }
        if (*benchc) {
            return cmd_bench(bch, g, seed_opt->count() > 0, out, err);
        }
        if (*fit) {
            return cmd_fit(fa, g, out);
        }
        return cmd_plot(pa, g, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace pfscale::cli
