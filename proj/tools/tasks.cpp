#include "tasks.hpp"

#include "critlab/concentration.hpp"
#include "critlab/conformal.hpp"
#include "critlab/constants.hpp"
#include "critlab/criticality.hpp"
#include "critlab/errors.hpp"
#include "critlab/green3.hpp"
#include "critlab/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace critlab::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Context {
    ExperimentConfig cfg;
    RunOptions opt;
    std::ofstream report;
    std::vector<std::pair<std::string, std::string>> summary;  // for sweep rows

    void note(const std::string& line) { report << line << "\n"; }
    void metric(const std::string& key, double value) {
        summary.emplace_back(key, fmt(value));
        report << key << " = " << fmt(value) << "\n";
    }
    void metric(const std::string& key, const std::string& value) {
        summary.emplace_back(key, value);
        report << key << " = " << value << "\n";
    }
};

ManifoldPtr build_manifold(const ExperimentConfig& cfg) {
    const std::string kind = cfg.get_or("manifold", "kind", "sphere");
    if (kind == "sphere") {
        const int dim = int(cfg.get_int("manifold", "dim"));
        const Index nodes = cfg.get_int_or("manifold", "nodes", 4096);
        const double clustering = cfg.get_real_or("manifold", "clustering", 2.0);
        return build_radial_sphere(dim, nodes, clustering);
    }
    if (kind == "torus") {
        const int dim = int(cfg.get_int("manifold", "dim"));
        const int m = int(cfg.get_int_or("manifold", "nodes", 16));
        const double L = cfg.get_real_or("manifold", "length", 1.0);
        return build_periodic_torus(dim, L, m);
    }
    throw ConfigError("config: unknown manifold kind '" + kind + "'");
}

SolverConfig build_solver_config(const ExperimentConfig& cfg, const RunOptions& opt) {
    SolverConfig sc;
    sc.tau = cfg.get_real_or("solver", "tau", 0.5);
    sc.max_iter = int(cfg.get_int_or("solver", "max_iter", 20000));
    // default residual tolerance: 1e-8 on the radial sphere, 1e-6 on the torus
    const bool torus = cfg.get_or("manifold", "kind", "sphere") == "torus";
    sc.tol_residual = cfg.get_real_or("solver", "tol_residual", torus ? 1e-6 : 1e-8);
    sc.rng_seed = std::uint64_t(opt.seed ? *opt.seed : cfg.get_int_or("solver", "seed", 0));
    const std::string init = cfg.get_or("solver", "init", "multistart");
    if (init == "constant") {
        sc.init = SolverInit::constant();
    } else if (init == "multistart") {
        sc.init = SolverInit::multistart();
    } else if (init.rfind("bubble(", 0) == 0 && init.back() == ')') {
        const double mu = std::stod(init.substr(7, init.size() - 8));
        sc.init = SolverInit::bubble(0, mu);
    } else {
        throw ConfigError("config: unknown solver init '" + init + "'");
    }
    if (cfg.has("fields", "h")) sc.h_profile = ProfileSpec::parse(cfg.get("fields", "h"));
    if (cfg.has("fields", "f")) sc.f_profile = ProfileSpec::parse(cfg.get("fields", "f"));
    return sc;
}

ProblemSpec build_problem(const ExperimentConfig& cfg, const ManifoldPtr& m, double q) {
    const ScalarField h = make_profile(m, ProfileSpec::parse(cfg.get("fields", "h")));
    const ScalarField f = make_profile(m, ProfileSpec::parse(cfg.get("fields", "f")));
    return ProblemSpec{m, h, f, q};
}

void write_solve_rows(std::ofstream& csv, const std::vector<SolveResult>& results) {
    csv << "q,lambda,residual,iters,converged,sup_u,min_u,peak_r\n";
    for (const auto& r : results) {
        Index ipk = 0;
        r.u.values.maxCoeff(&ipk);
        csv << fmt(r.q) << ',' << fmt(r.lambda) << ',' << fmt(r.residual) << ',' << r.iters
            << ',' << (r.converged ? 1 : 0) << ',' << fmt(r.u.values.maxCoeff()) << ','
            << fmt(r.u.values.minCoeff()) << ',' << fmt(r.u.manifold->node_radius()[ipk])
            << "\n";
    }
}

// ---- tasks ------------------------------------------------------------------

void task_constants(Context& ctx) {
    const int dim = int(ctx.cfg.get_int_or("task", "dim", ctx.cfg.get_int_or("manifold", "dim", 6)));
    const double supf = ctx.cfg.get_real_or("task", "sup_f", 1.0);
    const SharpConstants c = SharpConstants::make(dim);
    ctx.note("sharp constants, dimension " + std::to_string(dim));
    ctx.metric("omega_n", c.omega_n);
    ctx.metric("K2", c.K2);
    ctx.metric("two_star", c.two_star);
    ctx.metric("threshold", threshold(dim, supf));
}

void task_solve(Context& ctx) {
    auto m = build_manifold(ctx.cfg);
    const SolverConfig sc = build_solver_config(ctx.cfg, ctx.opt);
    std::vector<SolveResult> results;
    if (ctx.cfg.has("task", "q_list")) {
        const auto qs = ctx.cfg.get_reals("task", "q_list");
        results = continuation_in_q(build_problem(ctx.cfg, m, qs.empty() ? 0.0 : qs.front()),
                                    qs, sc);
    } else {
        double q = ctx.cfg.get_real_or("task", "q", 0.0);
        if (q == 0.0) q = critical_exponent(m->dim());
        results.push_back(minimize(build_problem(ctx.cfg, m, q), sc));
    }
    std::ofstream csv(fs::path(ctx.opt.out_dir) / "solve.csv");
    write_solve_rows(csv, results);
    const auto& last = results.back();
    ctx.metric("q", last.q);
    ctx.metric("lambda", last.lambda);
    ctx.metric("residual", last.residual);
    ctx.metric("sup_u", last.u.values.maxCoeff());
    ctx.metric("converged", last.converged ? "1" : "0");
}

void task_classify(Context& ctx) {
    auto m = build_manifold(ctx.cfg);
    const SolverConfig sc = build_solver_config(ctx.cfg, ctx.opt);
    const double tol_class = ctx.cfg.get_real_or("task", "tol_class", 0.05);
    const CriticalityReport rep =
        classify(build_problem(ctx.cfg, m, critical_exponent(m->dim())), sc, tol_class);

    std::ofstream csv(fs::path(ctx.opt.out_dir) / "classify.csv");
    csv << "lambda,threshold,margin,classification,coercive\n"
        << fmt(rep.lambda) << ',' << fmt(rep.threshold) << ',' << fmt(rep.margin) << ','
        << to_string(rep.classification) << ',' << (rep.coercive ? 1 : 0) << "\n";

    ctx.note(std::string("classification: ") + to_string(rep.classification) +
             ", margin = " + fmt(rep.margin));
    ctx.metric("lambda", rep.lambda);
    ctx.metric("threshold", rep.threshold);
    ctx.metric("margin", rep.margin);
    ctx.metric("classification", to_string(rep.classification));
    for (const auto& [p, gap] : rep.prop1_gaps)
        ctx.note("prop1_gap at node " + std::to_string(p) + " (r = " +
                 fmt(m->node_radius()[p]) + "): " + fmt(gap));
}

void task_find_critical(Context& ctx) {
    auto m = build_manifold(ctx.cfg);
    const SolverConfig sc = build_solver_config(ctx.cfg, ctx.opt);
    const double t_max = ctx.cfg.get_real_or("task", "t_max", 4.0);
    const double tol_t = ctx.cfg.get_real_or("task", "tol_t", 0.02);
    const double tol_class = ctx.cfg.get_real_or("task", "tol_class", 0.05);
    const double t0 = find_critical_offset(build_problem(ctx.cfg, m, critical_exponent(m->dim())),
                                           t_max, tol_t, tol_class, sc);
    ctx.metric("t0", t0);
    ctx.note("critical offset found: h - " + fmt(t0) + " approximates a critical function");
}

void task_aubin(Context& ctx) {
    auto m = build_manifold(ctx.cfg);
    std::vector<int> ks = {64, 128, 256, 512, 1024, 2048, 4096};
    if (ctx.cfg.has("task", "k_list")) ks = ctx.cfg.get_ints("task", "k_list");
    const double delta = ctx.cfg.get_real_or("task", "delta", 0.5);
    const ScalarField h = make_profile(m, ProfileSpec::parse(ctx.cfg.get("fields", "h")));
    const ScalarField f = make_profile(m, ProfileSpec::parse(ctx.cfg.get("fields", "f")));
    const auto maxima = max_points(*m, f.values);
    const AubinSeries s = aubin_slope(m, h, f, maxima.front(), ks, delta);

    std::ofstream csv(fs::path(ctx.opt.out_dir) / "aubin.csv");
    csv << "k,J_value,y_k\n";
    for (std::size_t i = 0; i < s.k_list.size(); ++i)
        csv << s.k_list[i] << ',' << fmt(s.J_values[i]) << ',' << fmt(s.y_values[i]) << "\n";

    ctx.metric("fitted_slope", s.fitted_slope);
    ctx.metric("fit_residual", s.fit_residual);
}

void task_concentrate(Context& ctx) {
    auto m = build_manifold(ctx.cfg);
    const double delta = ctx.cfg.get_real_or("task", "delta", 0.5);
    const double R = ctx.cfg.get_real_or("task", "R", 5.0);
    const double nu = ctx.cfg.get_real_or("task", "nu", 0.1);

    struct Row {
        double param;
        ConcentrationSample s;
    };
    std::vector<Row> rows;
    Index x0 = 0;

    if (ctx.cfg.has("task", "mu_list")) {
        // synthetic exact family
        const auto mus = ctx.cfg.get_reals("task", "mu_list");
        std::vector<double> offsets(mus.size(), 0.0);
        const std::string mode = ctx.cfg.get_or("task", "offsets", "zero");
        if (mode == "zero") {
        } else if (mode == "mu") {
            offsets = mus;
        } else if (mode == "sqrt_mu") {
            for (std::size_t i = 0; i < mus.size(); ++i) offsets[i] = std::sqrt(mus[i]);
        } else {
            offsets = parse_real_list(mode, "[task] offsets");
            if (offsets.size() != mus.size())
                throw ConfigError("config: offsets list length differs from mu_list");
        }
        const SyntheticFamily fam = synthetic_family(m, mus, offsets);
        ProblemSpec spec = build_problem(ctx.cfg, m, critical_exponent(m->dim()));
        x0 = max_points(*m, spec.f.values).front();
        const double lam = threshold(m->dim(), spec.f.max());
        for (std::size_t i = 0; i < mus.size(); ++i) {
            SolveResult r;
            r.u = fam.fields[i];
            r.lambda = lam;
            r.q = critical_exponent(m->dim());
            ConcentrationSample s = analyze(spec, r, x0, delta, R, nu);
            s.param = mus[i];
            rows.push_back({mus[i], s});
        }
        for (std::size_t i = 0; i < fam.a_values.size(); ++i)
            ctx.note("normalization a(mu=" + fmt(mus[i]) + ") = " + fmt(fam.a_values[i]));
    } else if (ctx.cfg.has("task", "q_list")) {
        // continuation trace
        const auto qs = ctx.cfg.get_reals("task", "q_list");
        const SolverConfig sc = build_solver_config(ctx.cfg, ctx.opt);
        const auto results =
            continuation_in_q(build_problem(ctx.cfg, m, qs.front()), qs, sc);
        for (const auto& r : results) {
            // results may live on adaptively rebuilt grids
            ProblemSpec spec = build_problem(ctx.cfg, r.u.manifold, r.q);
            const Index x0r = max_points(*r.u.manifold, spec.f.values).front();
            ConcentrationSample s = analyze(spec, r, x0r, delta, R, nu);
            s.param = r.q;
            rows.push_back({r.q, s});
        }
    } else {
        throw ConfigError("config: concentrate needs mu_list or q_list");
    }

    std::ofstream csv(fs::path(ctx.opt.out_dir) / "trace.csv");
    csv << "param,sup_u,mu,peak_r,mass_in_ball,l2_ratio,weak_sup,strong_sup,bubble_err,"
           "speed_ratio\n";
    for (const auto& [param, s] : rows) {
        csv << fmt(param) << ',' << fmt(s.sup_u) << ',' << fmt(s.mu) << ',' << fmt(s.peak_r)
            << ',' << fmt(s.mass_in_ball) << ',' << fmt(s.l2_ratio) << ',' << fmt(s.weak_sup)
            << ',' << fmt(s.strong_sup) << ',' << fmt(s.bubble_err) << ','
            << fmt(s.speed_ratio) << "\n";
    }
    ctx.metric("samples", double(rows.size()));
    if (!rows.empty()) {
        ctx.metric("last_mu", rows.back().s.mu);
        ctx.metric("last_mass_in_ball", rows.back().s.mass_in_ball);
        ctx.metric("last_speed_ratio", rows.back().s.speed_ratio);
    }
}

void task_green_mass(Context& ctx) {
    const ProfileSpec hp = ProfileSpec::parse(ctx.cfg.get_or("fields", "h", "const(0.75)"));
    const int n_nodes = int(ctx.cfg.get_int_or("task", "nodes", 4096));
    const auto h = [hp](double r) { return hp.eval_radial(r); };
    const bool want_shift = ctx.cfg.has("task", "find_critical_shift") &&
                            ctx.cfg.get("task", "find_critical_shift") != "off";
    try {
        const GreenProfile p = green_radial(h, n_nodes);
        std::ofstream csv(fs::path(ctx.opt.out_dir) / "green.csv");
        csv << "r,w,G\n";
        for (Index i = 0; i < p.r.size(); ++i)
            csv << fmt(p.r[i]) << ',' << fmt(p.w[i]) << ',' << fmt(p.G[i]) << "\n";
        ctx.metric("mass", p.mass);
    } catch (const PreconditionError& e) {
        // the base profile may be non-coercive while shifted ones are fine
        if (!want_shift) throw;
        ctx.note(std::string("mass unavailable: ") + e.what());
    }

    if (want_shift) {
        std::vector<double> range = {0.05, 3.0};
        if (ctx.cfg.has("task", "b_range")) range = ctx.cfg.get_reals("task", "b_range");
        if (range.size() != 2) throw ConfigError("config: b_range needs two values");
        const double tol = ctx.cfg.get_real_or("task", "tol_mass", 1e-5);
        const double b = find_mass_zero_offset(h, range[0], range[1], tol, n_nodes);
        ctx.metric("critical_shift", b);
    }
}

void task_conformal_check(Context& ctx) {
    const int dim = int(ctx.cfg.get_int_or("manifold", "dim", 3));
    std::vector<double> ns = {512, 1024, 2048, 4096};
    if (ctx.cfg.has("task", "n_list")) ns = ctx.cfg.get_reals("task", "n_list");
    const ProfileSpec hp = ProfileSpec::parse(ctx.cfg.get_or("fields", "h", "const(0.75)"));
    const ProfileSpec fp = ProfileSpec::parse(ctx.cfg.get_or("fields", "f", "const(1)"));
    // default fixture: u = 1 + 0.3 cos r, w = 1 + 0.2 cos 2r
    const ProfileSpec up = ProfileSpec::parse(ctx.cfg.get_or("fields", "u", "cos_poly(1, 0.3)"));
    const ProfileSpec wp =
        ProfileSpec::parse(ctx.cfg.get_or("fields", "w", "cos_poly(0.8, 0, 0.4)"));

    std::ofstream csv(fs::path(ctx.opt.out_dir) / "ladder.csv");
    csv << "N,residual\n";
    double prev = -1.0;
    for (double nd : ns) {
        auto m = build_radial_sphere(dim, Index(nd), 1.0);
        const auto fac = ConformalFactor::make(make_profile(m, up));
        const double res = covariance_residual(m, make_profile(m, hp), make_profile(m, fp), fac,
                                               make_profile(m, wp));
        csv << Index(nd) << ',' << fmt(res) << "\n";
        if (prev > 0.0) ctx.note("refinement ratio at N = " + fmt(nd) + ": " + fmt(prev / res));
        prev = res;
    }
    ctx.metric("final_residual", prev);
}

void run_task(Context& ctx) {
    const std::string name = ctx.cfg.get("task", "name");
    const auto t0 = std::chrono::steady_clock::now();
    if (name == "constants")
        task_constants(ctx);
    else if (name == "solve")
        task_solve(ctx);
    else if (name == "classify")
        task_classify(ctx);
    else if (name == "find-critical")
        task_find_critical(ctx);
    else if (name == "aubin")
        task_aubin(ctx);
    else if (name == "concentrate")
        task_concentrate(ctx);
    else if (name == "green-mass")
        task_green_mass(ctx);
    else if (name == "conformal-check")
        task_conformal_check(ctx);
    else
        throw ConfigError("config: unknown task '" + name + "'");
    const auto t1 = std::chrono::steady_clock::now();
    ctx.report << "elapsed_seconds = "
               << fmt(std::chrono::duration<double>(t1 - t0).count()) << "\n";
}

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Precondition: return 3;
        case ErrorKind::Resource: return 3;
        case ErrorKind::Numeric: return 4;
    }
    return 4;
}

void write_header(Context& ctx) {
    ctx.report << "# experiment report\n";
    if (ctx.opt.seed) ctx.report << "# seed override = " << *ctx.opt.seed << "\n";
    ctx.report << "# config echo:\n";
    for (const auto& line : ctx.cfg.raw_lines) ctx.report << "#   " << line << "\n";
    ctx.report << "\n";
}

int run_single_experiment(const ExperimentConfig& cfg, const RunOptions& opt,
                          std::vector<std::pair<std::string, std::string>>* summary_out) {
    Context ctx{cfg, opt, {}, {}};
    fs::create_directories(opt.out_dir);
    ctx.report.open(fs::path(opt.out_dir) / "report.txt");
    if (!ctx.report) {
        std::fprintf(stderr, "cannot write to output directory %s\n", opt.out_dir.c_str());
        return 2;
    }
    write_header(ctx);
    try {
        run_task(ctx);
    } catch (const Error& e) {
        ctx.report << "error: " << e.what() << "\n";
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    }
    if (summary_out) *summary_out = ctx.summary;
    return 0;
}

int run_sweep(const ExperimentConfig& cfg, const RunOptions& opt) {
    const std::string key = cfg.get("sweep", "key");
    const auto dot = key.find('.');
    if (dot == std::string::npos)
        throw ConfigError("config: sweep key must look like section.key");
    const std::string section = key.substr(0, dot), subkey = key.substr(dot + 1);
    const std::string values_text = cfg.get("sweep", "values");
    std::vector<std::string> values;
    {
        std::stringstream ss(values_text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::string t;
            for (char c : tok)
                if (!std::isspace(static_cast<unsigned char>(c))) t += c;
            if (!t.empty()) values.push_back(t);
        }
    }
    if (values.empty()) throw ConfigError("config: sweep values list is empty");

    struct Item {
        int exit = 0;
        std::vector<std::pair<std::string, std::string>> summary;
    };
    std::vector<Item> items(values.size());

    const int jobs = std::max(1, opt.jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= values.size()) return;
            ExperimentConfig item_cfg = cfg;
            item_cfg.set(section, subkey, values[i]);
            char name[32];
            std::snprintf(name, sizeof name, "item_%03zu", i);
            RunOptions item_opt = opt;
            item_opt.out_dir = (fs::path(opt.out_dir) / name).string();
            try {
                items[i].exit = run_single_experiment(item_cfg, item_opt, &items[i].summary);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "item %zu: %s\n", i, e.what());
                items[i].exit = 4;
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // ordered, single-threaded merge
    fs::create_directories(opt.out_dir);
    std::ofstream csv(fs::path(opt.out_dir) / "summary.csv");
    csv << "item," << subkey << ",status";
    // union of metric names in first-seen order
    std::vector<std::string> cols;
    for (const auto& it : items)
        for (const auto& [k, v] : it.summary)
            if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
    for (const auto& c : cols) csv << ',' << c;
    csv << "\n";
    bool any_ok = false;
    for (std::size_t i = 0; i < items.size(); ++i) {
        csv << i << ',' << values[i] << ',' << (items[i].exit == 0 ? "ok" : "failed");
        for (const auto& c : cols) {
            csv << ',';
            for (const auto& [k, v] : items[i].summary)
                if (k == c) {
                    csv << v;
                    break;
                }
        }
        csv << "\n";
        any_ok = any_ok || items[i].exit == 0;
    }
    return any_ok ? 0 : 4;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
    try {
        if (cfg.entries.count("sweep")) return run_sweep(cfg, opt);
        return run_single_experiment(cfg, opt, nullptr);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    }
}

int run_config_file(const std::string& path, const RunOptions& opt) {
    try {
        return run_experiment(ExperimentConfig::parse_file(path), opt);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e);
    }
}

int run_constants(int dim, const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.set("task", "name", "constants");
    cfg.set("task", "dim", std::to_string(dim));
    RunOptions opt;
    opt.out_dir = out_dir;
    const int code = run_experiment(cfg, opt);
    if (code == 0) {
        const SharpConstants c = SharpConstants::make(dim);
        std::printf("n = %d\nomega_n   = %s\nK2        = %s\n2*        = %s\nthreshold = %s\n",
                    dim, fmt(c.omega_n).c_str(), fmt(c.K2).c_str(), fmt(c.two_star).c_str(),
                    fmt(threshold(dim, 1.0)).c_str());
    }
    return code;
}

}  // namespace critlab::cli
