#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "sicover/sicover.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sicover;

namespace {

struct CliOptions {
    ExperimentConfig cfg;
    std::string config_path;
    bool check = false;
};

// Flat key=value config files, keys matching the long flag names. Values are
// loaded before parsing so command-line flags override them.
void load_flat_config(const std::string& path, CliOptions& opt) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        auto& c = opt.cfg;
        if (key == "family") c.family = val;
        else if (key == "dim") c.dim = std::stoi(val);
        else if (key == "param") c.family_param = std::stoi(val);
        else if (key == "lambda") c.lambda = std::stod(val);
        else if (key == "lambda-grid") {
            c.lambda_grid.clear();
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ',')) c.lambda_grid.push_back(std::stod(tok));
        } else if (key == "n") c.n_max = std::stoi(val);
        else if (key == "bigN") c.big_n = std::stoi(val);
        else if (key == "depth") c.depth_l = std::stoi(val);
        else if (key == "replicates") c.replicates = std::stol(val);
        else if (key == "seed") c.seed = std::stoull(val);
        else if (key == "tau") c.tau = std::stod(val);
        else if (key == "epsilon") c.epsilon = std::stod(val);
        else if (key == "parent-cap") c.parent_cap = std::stol(val);
        else if (key == "bisect-steps") c.bisect_steps = std::stoi(val);
        else if (key == "bracket-lo") c.bracket_lo = std::stod(val);
        else if (key == "bracket-hi") c.bracket_hi = std::stod(val);
        else if (key == "out") c.out_dir = val;
        else if (key == "check") opt.check = val == "1" || val == "true";
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

void add_common(CLI::App* sub, CliOptions& opt) {
    sub->add_option("--family", opt.cfg.family,
                    "shape family: ball | ball-open | cube | koch | rational-box | sieve | loop-soup");
    sub->add_option("--dim", opt.cfg.dim, "ambient dimension");
    sub->add_option("--param", opt.cfg.family_param,
                    "family truncation parameter (koch iterations, rational-box k_max, sieve n_max)");
    sub->add_option("--lambda", opt.cfg.lambda, "intensity");
    sub->add_option("--lambda-grid", opt.cfg.lambda_grid, "comma separated intensity grid")
        ->delimiter(',');
    sub->add_option("--n", opt.cfg.n_max, "box grid depth");
    sub->add_option("--bigN", opt.cfg.big_n, "levels per branching generation (N)");
    sub->add_option("--depth", opt.cfg.depth_l, "branching generations (L)");
    sub->add_option("--replicates", opt.cfg.replicates, "Monte Carlo replicates");
    sub->add_option("--seed", opt.cfg.seed, "root seed");
    sub->add_option("--tau", opt.cfg.tau, "survival threshold for the bisection");
    sub->add_option("--epsilon", opt.cfg.epsilon, "epsilon for the N selection rule");
    sub->add_option("--parent-cap", opt.cfg.parent_cap, "per-generation branching cap");
    sub->add_option("--bisect-steps", opt.cfg.bisect_steps, "bisection iterations");
    sub->add_option("--bracket-lo", opt.cfg.bracket_lo, "initial bisection bracket low end");
    sub->add_option("--bracket-hi", opt.cfg.bracket_hi, "initial bisection bracket high end");
    sub->add_option("--out", opt.cfg.out_dir, "output directory");
    sub->add_option("--config", opt.config_path, "flat key=value config file (flags override)");
    sub->add_flag("--check", opt.check, "exit 3 when a validation check fails");
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + name + " under " + dir);
    return os;
}

json config_json(const ExperimentConfig& c) {
    return json{{"family", c.family},       {"dim", c.dim},
                {"param", c.family_param},  {"lambda", c.lambda},
                {"n", c.n_max},             {"bigN", c.big_n},
                {"depth", c.depth_l},       {"replicates", c.replicates},
                {"seed", c.seed},           {"tau", c.tau},
                {"parent_cap", c.parent_cap}, {"bisect_steps", c.bisect_steps}};
}

json trend_json(const TrendReport& t) {
    return json{{"k", t.k},
                {"value", t.value},
                {"normalized", t.normalized},
                {"step", t.step},
                {"divergent", t.divergent},
                {"thin_by_dimension", t.thin_by_dimension},
                {"method", t.method}};
}

int run_validate(CliOptions& opt) {
    ValidationReport rep = validate_measure(opt.cfg);
    json j{{"family", rep.family},
           {"dim", rep.dim},
           {"mu_A1_closed", rep.mu_a1_closed},
           {"mu_A1_quadrature", rep.mu_a1_quadrature},
           {"lambda_e", rep.lambda_e.infinite ? json("infinity") : json(rep.lambda_e.value)},
           {"sandwich_ok", rep.sandwich_ok},
           {"monotone_ok", rep.monotone_ok},
           {"quadrature_ok", rep.quadrature_ok},
           {"layer_identity_ok", rep.layer_identity_ok},
           {"assumption1_locally_finite", rep.assumption1},
           {"assumption2_null_boundaries", rep.assumption2},
           {"assumption3_positive_volume", rep.assumption3},
           {"thin", rep.thin},
           {"extracond", trend_json(rep.extracond)},
           {"thinness", trend_json(rep.thinness)},
           {"config", config_json(opt.cfg)}};
    std::cout << j.dump(2) << "\n";
    if (!opt.cfg.out_dir.empty()) {
        open_out(opt.cfg.out_dir, "report.json") << j.dump(2) << "\n";
        auto os = open_out(opt.cfg.out_dir, "sequences.csv");
        write_sequence_csv(os, rep.a_seq, rep.b_seq);
        auto ot = open_out(opt.cfg.out_dir, "trends.csv");
        write_trend_csv(ot, "extracond", rep.extracond);
        write_trend_csv(ot, "thinness", rep.thinness);
    }
    return opt.check && !rep.ok() ? 3 : 0;
}

int run_scan(CliOptions& opt) {
    if (opt.cfg.lambda_grid.empty() && opt.cfg.lambda > 0) opt.cfg.lambda_grid = {opt.cfg.lambda};
    ScanReport rep = scan_lambda(opt.cfg);
    std::ostringstream table;
    write_scan_csv(table, rep);
    std::cout << table.str();
    if (!opt.cfg.out_dir.empty()) {
        open_out(opt.cfg.out_dir, "scan.csv") << table.str();
        auto oc = open_out(opt.cfg.out_dir, "counts.csv");
        write_counts_csv(oc, rep);
        auto og = open_out(opt.cfg.out_dir, "generations.csv");
        write_generations_csv(og, rep.runs);
        open_out(opt.cfg.out_dir, "run.json") << config_json(opt.cfg).dump(2) << "\n";
    }
    bool monotone = true;
    for (size_t i = 1; i < rep.rows.size(); ++i)
        monotone = monotone && rep.rows[i].survival <= rep.rows[i - 1].survival + 1e-12;
    return opt.check && !monotone ? 3 : 0;
}

int run_estimate(CliOptions& opt) {
    CriticalEstimate est = estimate_critical(opt.cfg);
    json j{{"lambda_hat", est.lambda_hat},
           {"bracket", {est.bracket_lo, est.bracket_hi}},
           {"reference", est.reference},
           {"rel_error", est.rel_error},
           {"bigN", est.big_n},
           {"depth", est.depth_l},
           {"tau", est.tau},
           {"replicates", est.replicates},
           {"config", config_json(opt.cfg)}};
    std::cout << j.dump(2) << "\n";
    if (!opt.cfg.out_dir.empty()) {
        open_out(opt.cfg.out_dir, "critical.json") << j.dump(2) << "\n";
        auto os = open_out(opt.cfg.out_dir, "probes.csv");
        os << "statistic,lambda,survival\n";
        for (auto& p : est.probes_lower) os << "untouched," << p.first << ',' << p.second << '\n';
        for (auto& p : est.probes_upper) os << "not-covered," << p.first << ',' << p.second << '\n';
    }
    return 0;
}

int run_compare(CliOptions& opt) {
    OpenClosedReport rep = compare_open_closed(opt.cfg);
    json j{{"open", {{"lambda_hat", rep.open_est.lambda_hat},
                     {"bracket", {rep.open_est.bracket_lo, rep.open_est.bracket_hi}}}},
           {"closed", {{"lambda_hat", rep.closed_est.lambda_hat},
                       {"bracket", {rep.closed_est.bracket_lo, rep.closed_est.bracket_hi}}}},
           {"reference", rep.reference},
           {"identical_classifications", rep.identical_classifications},
           {"identical_estimates", rep.identical_estimates},
           {"bracket_overlap",
            std::max(rep.open_est.bracket_lo, rep.closed_est.bracket_lo) <=
                std::min(rep.open_est.bracket_hi, rep.closed_est.bracket_hi)},
           {"config", config_json(opt.cfg)}};
    std::cout << j.dump(2) << "\n";
    if (!opt.cfg.out_dir.empty()) open_out(opt.cfg.out_dir, "compare.json") << j.dump(2) << "\n";
    return opt.check && !(rep.identical_classifications && rep.identical_estimates) ? 3 : 0;
}

int run_dump(CliOptions& opt) {
    SampleConfig sc;
    sc.measure = make_measure(opt.cfg);
    sc.lambda = opt.cfg.lambda > 0 ? opt.cfg.lambda : 1.0;
    sc.depth = opt.cfg.n_max;
    sc.window = AxisBox::unit(opt.cfg.dim);
    sc.seed = opt.cfg.seed;
    ProcessRealization r = sample_process(sc, 0);
    if (!opt.cfg.out_dir.empty()) {
        auto os = open_out(opt.cfg.out_dir, "realization.jsonl");
        dump_realization(os, sc, r);
    } else {
        dump_realization(std::cout, sc, r);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sicover: scale invariant Poisson covering simulator"};
    app.require_subcommand(1);

    CliOptions opt;
    auto* validate = app.add_subcommand("validate-measure", "measure calculus and assumption checks");
    auto* scan = app.add_subcommand("scan", "coupled lambda sweep of box counts and survival");
    auto* estimate = app.add_subcommand("estimate-critical", "bisection estimate of lambda_e");
    auto* compare = app.add_subcommand("compare-open-closed", "open vs closed balls on shared seeds");
    auto* dump = app.add_subcommand("dump-realization", "JSON-lines dump of one realization");
    for (auto* sub : {validate, scan, estimate, compare, dump}) add_common(sub, opt);

    try {
        // first pass just to capture --config, then load it as defaults and
        // let the real command line override
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string(argv[i]) == "--config") load_flat_config(argv[i + 1], opt);
        app.parse(argc, argv);
        if (validate->parsed()) return run_validate(opt);
        if (scan->parsed()) return run_scan(opt);
        if (estimate->parsed()) return run_estimate(opt);
        if (compare->parsed()) return run_compare(opt);
        if (dump->parsed()) return run_dump(opt);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
