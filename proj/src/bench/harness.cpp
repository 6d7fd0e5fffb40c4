#include "pfscale/bench/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "pfscale/common/rng.hpp"
#include "pfscale/common/stopwatch.hpp"
#include "pfscale/netmodel/network_io.hpp"
#include "pfscale/powerflow/powerflow.hpp"
#include "pfscale/regression/fit.hpp"
#include "pfscale/sparsekit/ordering.hpp"
#include "pfscale/ybus/upsilon.hpp"
#include "pfscale/ybus/ybus.hpp"

namespace pfscale::bench {

using sparse::Complex;

namespace {

struct Execution {
    PhaseTimes phases;
    int iterations = 1;
};

/// One subject's inputs. prepare_run() is untimed; execute() is the timed
/// section and reports its own phase split.
class Runner {
  public:
    virtual ~Runner() = default;
    virtual void prepare_run(int /*run*/) {}
    virtual Execution execute() = 0;
    virtual std::vector<Complex> solution() const = 0;

    std::int64_t n = 0;
    std::int64_t nnz = 0;
};

template <class T>
std::vector<T> random_rhs(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<T> b(n);
    for (T& v : b) {
        if constexpr (std::is_same_v<T, double>) {
            v = rng.uniform(-1.0, 1.0);
        } else {
            const double re = rng.uniform(-1.0, 1.0);
            v = T(re, rng.uniform(-1.0, 1.0));
        }
    }
    return b;
}

/// Order + factorize + one solve of a fixed matrix against a fixed rhs.
template <class T>
class SingleSolve : public Runner {
  public:
    Execution execute() override {
        Stopwatch watch;
        const auto f = sparse::lu_factorize(*matrix_, sparse::default_ordering(*matrix_));
        Execution ex;
        ex.phases.order_factor = watch.lap();
        x_.resize(rhs_.size());
        sparse::lu_solve_into<T>(f, rhs_, x_, work_);
        ex.phases.solve = watch.seconds();
        return ex;
    }

    std::vector<Complex> solution() const override { return {x_.begin(), x_.end()}; }

  protected:
    void set(std::shared_ptr<const sparse::SparseMatrix<T>> m, std::uint64_t rhs_seed) {
        matrix_ = std::move(m);
        rhs_ = random_rhs<T>(static_cast<std::size_t>(matrix_->rows()), rhs_seed);
        nnz = matrix_->nnz();
    }

    std::shared_ptr<const sparse::SparseMatrix<T>> matrix_;
    std::vector<T> rhs_;
    std::vector<T> x_;
    std::vector<T> work_;
};

net::Network load_case_network(const BenchCase& c) {
    if (c.generator) {
        return net::generate_radial(*c.generator);
    }
    if (c.network_file) {
        return net::load_network(*c.network_file);
    }
    throw BenchError(fmt::format("case '{}': no network source", c.case_id));
}

class YbusRunner : public SingleSolve<Complex> {
  public:
    explicit YbusRunner(const BenchCase& c) {
        const auto sys = ybus::assemble(load_case_network(c));
        n = sys.n();
        set(std::make_shared<const sparse::SparseMatrix<Complex>>(sys.y_ll), c.params.seed);
        nnz = sys.y_full.nnz();
    }
};

class JacobianRunner : public SingleSolve<double> {
  public:
    explicit JacobianRunner(const BenchCase& c) {
        const auto sys = ybus::assemble(load_case_network(c));
        n = sys.n();
        pf::FixedPointOptions opt;
        opt.tol = c.params.tol;
        opt.max_iter = c.params.max_iter;
        const auto op = pf::solve_fixed_point(sys, opt);
        if (!op.converged) {
            throw BenchError("operating point did not converge");
        }
        auto js = pf::build_jacobian_system(sys, op.v_nodes);
        set(std::make_shared<const sparse::SparseMatrix<double>>(std::move(js.s_blocks)),
            c.params.seed);
    }
};

class UpsilonRunner : public SingleSolve<double> {
  public:
    explicit UpsilonRunner(const BenchCase& c) : c_(c) {
        if (c.upsilon_n < 2) {
            throw BenchError(fmt::format("case '{}': upsilon size must be at least 2", c.case_id));
        }
        n = c.upsilon_n;
        prepare_run(-1);
    }

    // a fresh matrix per run, drawn outside the timed section
    void prepare_run(int run) override {
        ybus::UpsilonSpec spec;
        spec.n = c_.upsilon_n;
        spec.p = c_.params.p;
        spec.seed = c_.params.seed * 1000003ULL + static_cast<std::uint64_t>(run + 1);
        set(std::make_shared<const sparse::SparseMatrix<double>>(ybus::generate_upsilon(spec)),
            c_.params.seed);
    }

  private:
    BenchCase c_;
};

class ConstAdmittanceRunner : public Runner {
  public:
    explicit ConstAdmittanceRunner(const BenchCase& c)
        : sys_(ybus::assemble(load_case_network(c))) {
        n = sys_.n();
        nnz = sys_.y_full.nnz();
    }

    Execution execute() override {
        sol_ = pf::solve_constant_admittance(sys_);
        Execution ex;
        ex.phases.order_factor = sol_.timings.factor_seconds;
        ex.phases.solve = sol_.timings.total() - sol_.timings.factor_seconds;
        return ex;
    }

    std::vector<Complex> solution() const override { return sol_.v_nodes; }

  private:
    ybus::YbusSystem sys_;
    pf::PowerFlowSolution sol_;
};

/// Converges at load_from (untimed), then times factorization plus the
/// iterations after the step to load_to, warm-started from the first
/// solution.
class FixedPointRunner : public Runner {
  public:
    explicit FixedPointRunner(const BenchCase& c) : params_(c.params) {
        const CaseParams& p = c.params;
        if (!(p.stored_load_level > 0.0)) {
            throw BenchError("stored_load_level must be positive");
        }
        const net::Network base = load_case_network(c);
        const auto before = ybus::assemble(base.scale_loads(p.load_from / p.stored_load_level));
        sys_ = ybus::assemble(base.scale_loads(p.load_to / p.stored_load_level));
        n = sys_.n();
        nnz = sys_.y_full.nnz();
        const auto warm = pf::solve_fixed_point(before, options(std::nullopt));
        if (!warm.converged) {
            throw BenchError(fmt::format("no convergence at {:.0f}% load after {} iterations",
                                         100.0 * p.load_from, warm.iterations));
        }
        v_start_ = warm.v_nodes;
    }

    Execution execute() override {
        Stopwatch watch;
        const pf::FixedPointSolver solver(sys_, false);
        Execution ex;
        ex.phases.order_factor = watch.seconds();
        sol_ = solver.solve(sys_.s_load, options(v_start_));
        if (!sol_.converged) {
            throw BenchError(fmt::format("no convergence at {:.0f}% load after {} iterations",
                                         100.0 * params_.load_to, sol_.iterations));
        }
        ex.phases.solve = sol_.timings.total() - sol_.timings.factor_seconds;
        ex.iterations = sol_.iterations;
        return ex;
    }

    std::vector<Complex> solution() const override { return sol_.v_nodes; }

  private:
    pf::FixedPointOptions options(std::optional<std::vector<Complex>> v_init) const {
        pf::FixedPointOptions o;
        o.tol = params_.tol;
        o.max_iter = params_.max_iter;
        o.v_init = std::move(v_init);
        return o;
    }

    CaseParams params_;
    ybus::YbusSystem sys_;
    std::vector<Complex> v_start_;
    pf::PowerFlowSolution sol_;
};

std::unique_ptr<Runner> make_runner(const BenchCase& c) {
    switch (c.subject) {
        case Subject::FixedPointPF:
            return std::make_unique<FixedPointRunner>(c);
        case Subject::ConstAdmittancePF:
            return std::make_unique<ConstAdmittanceRunner>(c);
        case Subject::ImplicitJacobianSolve:
            return std::make_unique<JacobianRunner>(c);
        case Subject::YbusSolve:
            return std::make_unique<YbusRunner>(c);
        case Subject::UpsilonSolve:
            return std::make_unique<UpsilonRunner>(c);
    }
    throw BenchError("unknown subject");
}

// Keep freed memory in the process: otherwise glibc hands large blocks back
// to the kernel and every run pays a varying number of page faults.
void configure_allocator() {
#if defined(__GLIBC__)
    static const bool done = [] {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, std::numeric_limits<int>::max());
        mallopt(M_TOP_PAD, 64 << 20);
        return true;
    }();
    (void)done;
#endif
}

BenchSample failed_sample(const BenchCase& c) {
    BenchSample s;
    s.case_id = c.case_id;
    s.subject = c.subject;
    s.n = c.n;
    s.nnz = c.nnz;
    s.iterations = 0;
    s.failed = true;
    return s;
}

}  // namespace

CaseResult run_case_detailed(const BenchCase& c, const RunOptions& options) {
    if (options.repetitions < 1 || options.warmup < 0 || options.inner_loop_count < 1) {
        throw BenchError("repetitions and inner_loop_count must be positive, warmup non-negative");
    }
    configure_allocator();
    CaseResult result;
    try {
        const std::unique_ptr<Runner> runner = make_runner(c);
        for (int w = 0; w < options.warmup; ++w) {
            runner->prepare_run(-1 - w);
            runner->execute();
        }

        const auto timed_runs = [&](int inner) {
            result.samples.clear();
            result.phases.clear();
            result.outer_seconds.clear();
            for (int r = 0; r < options.repetitions; ++r) {
                runner->prepare_run(r);
                PhaseTimes sum;
                int iterations = 1;
                Stopwatch outer;
                for (int k = 0; k < inner; ++k) {
                    const Execution ex = runner->execute();
                    sum.order_factor += ex.phases.order_factor;
                    sum.solve += ex.phases.solve;
                    iterations = ex.iterations;
                }
                const double wall = outer.seconds() / inner;
                const PhaseTimes mean{sum.order_factor / inner, sum.solve / inner};
                BenchSample s;
                s.case_id = c.case_id;
                s.subject = c.subject;
                s.n = runner->n;
                s.nnz = runner->nnz;
                s.run_index = r;
                // guard against a zero reading from a coarse clock
                s.t_seconds = std::max(mean.total(), 1e-12);
                s.iterations = iterations;
                result.samples.push_back(s);
                result.phases.push_back(mean);
                result.outer_seconds.push_back(wall);
            }
        };

        timed_runs(1);
        std::vector<double> t;
        for (const BenchSample& s : result.samples) {
            t.push_back(s.t_seconds);
        }
        if (reg::lower_median(t) < options.inner_loop_threshold && options.inner_loop_count > 1) {
            result.inner_loop = true;
            timed_runs(options.inner_loop_count);
        }
        result.last_solution = runner->solution();
    } catch (const std::exception& e) {
        result = CaseResult{};
        result.error = e.what();
        result.samples.push_back(failed_sample(c));
    }
    return result;
}

std::vector<BenchSample> run_case(const BenchCase& c, const RunOptions& options) {
    return run_case_detailed(c, options).samples;
}

std::vector<std::int64_t> SizeGrid::values() const {
    if (count < 0 || (count > 0 && !(min > 0.0 && max >= min))) {
        throw BenchError(fmt::format("invalid size grid {}..{} x {}", min, max, count));
    }
    std::vector<std::int64_t> out;
    for (int k = 0; k < count; ++k) {
        const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        out.push_back(std::llround(min * std::pow(max / min, f)));
    }
    return out;
}

namespace {

bool network_subject(Subject s) { return s != Subject::UpsilonSolve; }

std::uint64_t case_seed(std::uint64_t seed, std::size_t index) {
    return seed * 1000003ULL + index;
}

}  // namespace

std::vector<BenchCase> plan_campaign(const CampaignSpec& spec) {
    std::vector<BenchCase> cases;
    const std::vector<std::int64_t> sizes = spec.sizes.values();
    for (const Subject subject : spec.subjects) {
        const std::string name(to_string(subject));
        if (network_subject(subject) && !spec.networks.empty()) {
            for (const auto& path : spec.networks) {
                BenchCase c;
                c.case_id = fmt::format("{}-{}", name, path.stem().string());
                c.subject = subject;
                c.params = spec.params;
                c.params.seed = spec.seed;
                c.network_file = path;
                const net::Network net = net::load_network(path);
                c.n = net.node_count();
                cases.push_back(std::move(c));
            }
            continue;
        }
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            BenchCase c;
            c.case_id = fmt::format("{}-{:03}", name, k);
            c.subject = subject;
            c.params = spec.params;
            c.params.seed = case_seed(spec.seed, k);
            if (network_subject(subject)) {
                net::GeneratorSpec g;
                g.phase_mix = spec.phase_mix;
                g.impedance = spec.impedance;
                g.load_density = spec.load_density;
                g.seed = c.params.seed;
                g.m = net::buses_for_nodes(static_cast<std::int32_t>(sizes[k]), spec.phase_mix);
                c.n = net::generate_radial(g).node_count();
                c.generator = g;
            } else {
                c.upsilon_n = static_cast<std::int32_t>(sizes[k]);
                c.n = sizes[k];
            }
            cases.push_back(std::move(c));
        }
    }
    std::stable_sort(cases.begin(), cases.end(),
                     [](const BenchCase& a, const BenchCase& b) { return a.n < b.n; });
    return cases;
}

CampaignSummary run_campaign(const CampaignSpec& spec, const SampleSink& sink) {
    CampaignSummary summary;
    for (const BenchCase& c : plan_campaign(spec)) {
        const CaseResult r = run_case_detailed(c, spec.run);
        ++summary.cases;
        if (!r.error.empty()) {
            summary.failed_cases.push_back(fmt::format("{}: {}", c.case_id, r.error));
        }
        if (r.inner_loop) {
            summary.inner_loop_cases.push_back(c.case_id);
        }
        for (const BenchSample& s : r.samples) {
            sink(s);
        }
    }
    return summary;
}

nlohmann::json to_json(const CampaignSpec& spec) {
    nlohmann::json subjects = nlohmann::json::array();
    for (const Subject s : spec.subjects) {
        subjects.push_back(std::string(to_string(s)));
    }
    nlohmann::json networks = nlohmann::json::array();
    for (const auto& p : spec.networks) {
        networks.push_back(p.string());
    }
    const CaseParams& p = spec.params;
    return {{"subjects", std::move(subjects)},
            {"sizes", {{"min", spec.sizes.min}, {"max", spec.sizes.max}, {"count", spec.sizes.count}}},
            {"networks", std::move(networks)},
            {"repetitions", spec.run.repetitions},
            {"warmup", spec.run.warmup},
            {"seed", spec.seed},
            {"p", p.p},
            {"step", {p.load_from, p.load_to}},
            {"stored_load_level", p.stored_load_level},
            {"tol", p.tol},
            {"max_iter", p.max_iter},
            {"phase_mix",
             {{"three", spec.phase_mix.three},
              {"two", spec.phase_mix.two},
              {"one", spec.phase_mix.one}}},
            {"rating_factor", spec.impedance.rating_factor}};
}

CampaignSpec campaign_from_json(const nlohmann::json& doc) {
    CampaignSpec spec;
    try {
        for (const auto& s : doc.at("subjects")) {
            const auto subject = parse_subject(s.get<std::string>());
            if (!subject) {
                throw BenchError(fmt::format("unknown subject '{}'", s.get<std::string>()));
            }
            spec.subjects.push_back(*subject);
        }
        if (doc.contains("sizes")) {
            const auto& z = doc["sizes"];
            spec.sizes.min = z.value("min", spec.sizes.min);
            spec.sizes.max = z.value("max", spec.sizes.max);
            spec.sizes.count = z.value("count", spec.sizes.count);
        }
        for (const auto& p : doc.value("networks", nlohmann::json::array())) {
            spec.networks.emplace_back(p.get<std::string>());
        }
        spec.run.repetitions = doc.value("repetitions", spec.run.repetitions);
        spec.run.warmup = doc.value("warmup", spec.run.warmup);
        spec.seed = doc.value("seed", spec.seed);
        CaseParams& p = spec.params;
        p.p = doc.value("p", p.p);
        if (doc.contains("step")) {
            p.load_from = doc["step"].at(0).get<double>();
            p.load_to = doc["step"].at(1).get<double>();
        }
        p.stored_load_level = doc.value("stored_load_level", p.stored_load_level);
        p.tol = doc.value("tol", p.tol);
        p.max_iter = doc.value("max_iter", p.max_iter);
        if (doc.contains("phase_mix")) {
            const auto& m = doc["phase_mix"];
            spec.phase_mix.three = m.value("three", spec.phase_mix.three);
            spec.phase_mix.two = m.value("two", spec.phase_mix.two);
            spec.phase_mix.one = m.value("one", spec.phase_mix.one);
        }
        spec.impedance.rating_factor = doc.value("rating_factor", spec.impedance.rating_factor);
    } catch (const nlohmann::json::exception& e) {
        throw BenchError(fmt::format("campaign spec: {}", e.what()));
    }
    spec.sizes.values();  // validates
    return spec;
}

CampaignSpec load_campaign(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw BenchError(fmt::format("cannot open campaign spec '{}'", path.string()));
    }
    try {
        return campaign_from_json(nlohmann::json::parse(is));
    } catch (const nlohmann::json::parse_error& e) {
        throw BenchError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_samples_header(std::ostream& os) {
    os << "case_id,subject,n,nnz,run_index,t_seconds,iterations,failed\n";
}

void write_sample(std::ostream& os, const BenchSample& s) {
    fmt::print(os, "{},{},{},{},{},{:.9e},{},{}\n", s.case_id, to_string(s.subject), s.n, s.nnz,
               s.run_index, s.t_seconds, s.iterations, s.failed ? 1 : 0);
}

std::vector<BenchSample> read_samples(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "case_id,subject,n,nnz,run_index,t_seconds,iterations,failed") {
        throw BenchError("sample CSV: missing or unexpected header");
    }
    std::vector<BenchSample> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() != 8) {
            throw BenchError(fmt::format("sample CSV line {}: expected 8 fields, got {}", lineno,
                                         f.size()));
        }
        BenchSample s;
        s.case_id = f[0];
        const auto subject = parse_subject(f[1]);
        if (!subject) {
            throw BenchError(fmt::format("sample CSV line {}: unknown subject '{}'", lineno, f[1]));
        }
        s.subject = *subject;
        try {
            s.n = std::stoll(f[2]);
            s.nnz = std::stoll(f[3]);
            s.run_index = std::stoi(f[4]);
            s.t_seconds = std::stod(f[5]);
            s.iterations = std::stoi(f[6]);
            s.failed = std::stoi(f[7]) != 0;
        } catch (const std::logic_error&) {
            throw BenchError(fmt::format("sample CSV line {}: malformed number", lineno));
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace pfscale::bench
