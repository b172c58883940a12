// piid — pairwise-independent sequence laboratory.
//
// Subcommands:
//   generate    draw labels, indicators and the margin-assigned sequence
//   limit       evaluate the limiting law (pdf/cdf grid, moments, quantiles)
//   verify      exact small-instance enumeration of the indicator law
//   converge    Monte-Carlo convergence study of S_n against the limit law
//   estimate-r  analytic vs Monte-Carlo estimate of the shape parameter r
//
// Exit codes: 0 success, 2 configuration error, 3 margin validation failure,
// 4 violated exact identity.

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "piid/construction.hpp"
#include "piid/errors.hpp"
#include "piid/format.hpp"
#include "piid/limit_law.hpp"
#include "piid/margins.hpp"
#include "piid/special_functions.hpp"
#include "piid/statistics.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMargin = 3;
constexpr int kExitIdentity = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("PIID_SEED")) {
        std::uint64_t value = 0;
        const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
        if (ec != std::errc() || *ptr != '\0')
            throw ConfigError("PIID_SEED is not an unsigned integer");
        return value;
    }
    return 1;  // documented default
}

// Margin argument: either a built-in name with optional `name:key=value,...`
// parameters, or a path to a JSON margin spec.
piid::MarginSpec parse_margin(const std::string& arg) {
    using piid::MarginSpec;
    if (arg.ends_with(".json") || std::filesystem::exists(arg)) {
        std::ifstream in(arg);
        if (!in) throw ConfigError("cannot open margin file: " + arg);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("margin file is not valid JSON: " + std::string(e.what()));
        }
        return MarginSpec::from_json(doc);
    }
    std::string name = arg;
    std::map<std::string, double> kv;
    if (const auto colon = arg.find(':'); colon != std::string::npos) {
        name = arg.substr(0, colon);
        std::string rest = arg.substr(colon + 1);
        for (std::size_t pos = 0; pos < rest.size();) {
            const std::size_t comma = std::min(rest.find(',', pos), rest.size());
            const std::string item = rest.substr(pos, comma - pos);
            const std::size_t eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("margin parameter needs key=value: " + item);
            try {
                kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
            } catch (const std::exception&) {
                throw ConfigError("margin parameter is not numeric: " + item);
            }
            pos = comma + 1;
        }
    }
    auto take = [&kv](const std::string& key, double fallback) {
        const auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        const double value = it->second;
        kv.erase(it);
        return value;
    };
    MarginSpec spec = [&]() {
        if (name == "normal") return MarginSpec::normal(take("mu", 0.0), take("sigma", 1.0));
        if (name == "lognormal") return MarginSpec::log_normal(take("beta", 1.0));
        if (name == "twopoint")
            return MarginSpec::two_point_extreme(static_cast<int>(take("ell", 2)));
        if (name == "fourpoint")
            return MarginSpec::symmetric_four_point(static_cast<int>(take("ell", 2)));
        if (name == "uniform")
            return MarginSpec::symmetric_uniform(static_cast<int>(take("ell", 2)));
        if (name == "gaussmix")
            return MarginSpec::gaussian_mixture(static_cast<int>(take("ell", 2)),
                                                take("sigma", 0.1));
        throw ConfigError("unknown margin '" + name +
                          "' (built-ins: normal, lognormal, twopoint, fourpoint, uniform, "
                          "gaussmix; or a JSON file path)");
    }();
    if (!kv.empty()) throw ConfigError("unknown margin parameter: " + kv.begin()->first);
    return spec;
}

piid::SplitMargin split_or_report(const piid::MarginSpec& spec) {
    const piid::ValidationReport report = piid::validate(spec);
    if (!report.ok()) {
        std::cerr << "margin validation failed:\n";
        for (const auto& finding : report.findings) std::cerr << "  " << finding.detail << "\n";
        std::exit(kExitMargin);
    }
    return piid::split(spec);
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

nlohmann::json margin_meta(const piid::MarginSpec& spec, const piid::SplitMargin& split) {
    return {{"margin", spec.to_json()}, {"ell", split.ell()},    {"r", split.r()},
            {"mu", split.mean()},       {"sigma", split.stddev()}, {"mu_u", split.mu_u()},
            {"mu_v", split.mu_v()},     {"sigma_u", split.sigma_u()},
            {"sigma_v", split.sigma_v()}};
}

std::vector<int> parse_int_list(const std::string& arg) {
    std::vector<int> out;
    for (std::size_t pos = 0; pos < arg.size();) {
        const std::size_t comma = std::min(arg.find(',', pos), arg.size());
        out.push_back(std::stoi(arg.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

struct Grid {
    double lo, hi, step;
};

Grid parse_grid(const std::string& arg) {
    // lo:hi:step
    const std::size_t c1 = arg.find(':');
    const std::size_t c2 = arg.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError("grid must be lo:hi:step");
    Grid grid{std::stod(arg.substr(0, c1)), std::stod(arg.substr(c1 + 1, c2 - c1 - 1)),
              std::stod(arg.substr(c2 + 1))};
    if (!(grid.step > 0.0) || !(grid.hi >= grid.lo)) throw ConfigError("grid must be increasing");
    return grid;
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& margin_arg, int m, std::optional<std::uint64_t> seed_flag,
                 const std::string& out_prefix) {
    if (m < 2) throw ConfigError("--m must be >= 2");
    const std::uint64_t seed = resolve_seed(seed_flag);
    const piid::MarginSpec spec = parse_margin(margin_arg);
    const piid::SplitMargin split = split_or_report(spec);

    piid::RngStream rng(seed);
    const piid::LabelSequence labels = piid::draw_labels(split.ell(), m, rng);
    const piid::DependencySequence d = piid::build_D(labels);
    const piid::PairwiseSample sample = piid::build_X(d, split, rng);

    {
        auto out = open_out(out_prefix + "_labels.csv");
        out << "j,label\n";
        for (int j = 0; j < labels.m(); ++j) out << j + 1 << "," << labels.labels[j] << "\n";
    }
    {
        auto out = open_out(out_prefix + "_d.csv");
        out << "k,d\n";
        for (std::int64_t k = 0; k < d.n(); ++k) out << k + 1 << "," << int(d.bits[k]) << "\n";
    }
    {
        auto out = open_out(out_prefix + "_x.csv");
        out << "k,d,x\n";
        for (std::int64_t k = 0; k < sample.n(); ++k)
            out << k + 1 << "," << int(d.bits[k]) << "," << piid::fmt_double(sample.x[k]) << "\n";
    }
    nlohmann::json meta = margin_meta(spec, split);
    meta["command"] = "generate";
    meta["m"] = m;
    meta["n"] = sample.n();
    meta["seed"] = seed;
    meta["count_ones"] = piid::count_ones_closed_form(piid::tally(labels));
    meta["standardized_mean"] = piid::standardized_mean(sample);
    auto out = open_out(out_prefix + "_meta.json");
    out << meta.dump(2) << "\n";
    std::cout << "wrote " << out_prefix << "_{labels,d,x}.csv and _meta.json (n = " << sample.n()
              << ")\n";
    return kExitOk;
}

int cmd_limit(int ell, double r, const std::string& grid_arg, std::optional<double> quantile_p,
              int samples, std::optional<std::uint64_t> seed_flag, bool gaussian_distance,
              const std::string& out_prefix) {
    if (ell < 2) throw ConfigError("--ell must be >= 2");
    if (!(std::fabs(r) <= 1.0)) throw ConfigError("--r must lie in [-1, 1]");
    const piid::LimitLaw law(ell, r);

    if (quantile_p) {
        if (!(*quantile_p > 0.0 && *quantile_p < 1.0))
            throw ConfigError("--quantile must lie in (0, 1)");
        std::cout << piid::fmt_double(law.quantile(*quantile_p)) << "\n";
        return kExitOk;
    }

    const piid::LawMoments moments = law.moments();
    nlohmann::json meta{{"command", "limit"},
                        {"ell", ell},
                        {"r", r},
                        {"mean", moments.mean},
                        {"variance", moments.variance},
                        {"skewness", moments.skewness()},
                        {"kurtosis", moments.kurtosis()}};
    if (gaussian_distance) meta["gaussian_distance"] = law.gaussian_distance();

    if (!grid_arg.empty()) {
        const Grid grid = parse_grid(grid_arg);
        auto out = open_out(out_prefix + "_grid.csv");
        out << "s,pdf,cdf\n";
        const auto steps = static_cast<std::int64_t>((grid.hi - grid.lo) / grid.step + 0.5);
        for (std::int64_t i = 0; i <= steps; ++i) {
            const double s = grid.lo + static_cast<double>(i) * grid.step;
            out << piid::fmt_double(s) << "," << piid::fmt_double(law.pdf(s)) << ","
                << piid::fmt_double(law.cdf(s)) << "\n";
        }
        meta["grid"] = grid_arg;
        meta["grid_rows"] = steps + 1;
    }
    if (samples > 0) {
        const std::uint64_t seed = resolve_seed(seed_flag);
        meta["seed"] = seed;
        piid::RngStream sampler(seed);
        const std::vector<double> draws = law.sample(sampler, samples);
        auto out = open_out(out_prefix + "_samples.csv");
        out << "s\n";
        for (double v : draws) out << piid::fmt_double(v) << "\n";
    }
    auto out = open_out(out_prefix + "_law.json");
    out << meta.dump(2) << "\n";
    std::cout << "wrote " << out_prefix << "_law.json\n";
    return kExitOk;
}

int cmd_verify(int ell, int m) {
    if (ell < 2) throw ConfigError("--ell must be >= 2");
    if (m < 3) throw ConfigError("--m must be >= 3 (triples need three indices)");
    piid::ExactPairLaw law;
    try {
        law = piid::enumerate_exact(ell, m);
    } catch (const piid::TooLargeError& e) {
        throw ConfigError(e.what());
    }
    law.print(std::cout);
    const bool marginals = law.marginals_exact();
    const bool pairwise = law.pairwise_exact();
    const bool triple = law.has_dependent_triple();
    if (!marginals || !pairwise || !triple) {
        std::cerr << "EXACT IDENTITY VIOLATED: marginals=" << marginals
                  << " pairwise=" << pairwise << " dependent_triple=" << triple << "\n";
        return kExitIdentity;
    }
    std::cout << "all exact identities hold; the sequence is pairwise independent and "
                 "not mutually independent\n";
    return kExitOk;
}

int cmd_converge(const std::string& margin_arg, const std::string& m_grid_arg, int reps,
                 std::optional<std::uint64_t> seed_flag, int workers, const std::string& format,
                 const std::string& out_prefix) {
    const std::uint64_t seed = resolve_seed(seed_flag);
    const piid::MarginSpec spec = parse_margin(margin_arg);
    const piid::SplitMargin split = split_or_report(spec);
    const std::vector<int> grid = parse_int_list(m_grid_arg);
    piid::ConvergenceReport report;
    try {
        report = piid::convergence_study(split, grid, reps, seed, workers);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    nlohmann::json meta = margin_meta(spec, split);
    meta["command"] = "converge";
    meta["m_grid"] = grid;
    meta["reps"] = reps;
    meta["seed"] = seed;
    if (format == "json") {
        nlohmann::json doc = report.to_json();
        doc["config"] = meta;
        auto out = open_out(out_prefix + "_converge.json");
        out << doc.dump(2) << "\n";
        std::cout << "wrote " << out_prefix << "_converge.json\n";
    } else {
        auto out = open_out(out_prefix + "_converge.csv");
        report.to_csv(out);
        auto meta_out = open_out(out_prefix + "_meta.json");
        meta_out << meta.dump(2) << "\n";
        std::cout << "wrote " << out_prefix << "_converge.csv and _meta.json\n";
    }
    return kExitOk;
}

int cmd_estimate_r(const std::string& margin_arg, std::int64_t draws,
                   std::optional<std::uint64_t> seed_flag) {
    if (draws < 1000) throw ConfigError("--draws must be >= 1000");
    const std::uint64_t seed = resolve_seed(seed_flag);
    const piid::MarginSpec spec = parse_margin(margin_arg);
    const piid::SplitMargin split = split_or_report(spec);

    piid::RngStream rng(seed);
    // Monte-Carlo estimate (mean_V - mean)/(sd sqrt(ell-1)) with a block
    // standard error, classifying draws by membership in A.
    const int blocks = 100;
    const std::int64_t per_block = draws / blocks;
    std::vector<double> block_r(blocks);
    double grand_sum = 0, grand_sq = 0, grand_v_sum = 0;
    std::int64_t grand_v_count = 0;
    const double root = std::sqrt(split.ell() - 1.0);
    for (int b = 0; b < blocks; ++b) {
        double sum = 0, sq = 0, v_sum = 0;
        std::int64_t v_count = 0;
        for (std::int64_t i = 0; i < per_block; ++i) {
            const double w = split.sample_w(rng);
            sum += w;
            sq += w * w;
            if (split.in_a(w)) {
                v_sum += w;
                ++v_count;
            }
        }
        const double mean = sum / per_block;
        const double var = sq / per_block - mean * mean;
        block_r[b] = v_count > 0 ? (v_sum / v_count - mean) / (std::sqrt(var) * root) : 0.0;
        grand_sum += sum;
        grand_sq += sq;
        grand_v_sum += v_sum;
        grand_v_count += v_count;
    }
    const double n = static_cast<double>(per_block) * blocks;
    const double mean = grand_sum / n;
    const double var = grand_sq / n - mean * mean;
    const double estimate = (grand_v_sum / grand_v_count - mean) / (std::sqrt(var) * root);
    double block_mean = 0;
    for (double v : block_r) block_mean += v;
    block_mean /= blocks;
    double block_var = 0;
    for (double v : block_r) block_var += (v - block_mean) * (v - block_mean);
    block_var /= (blocks - 1);
    const double std_error = std::sqrt(block_var / blocks);

    nlohmann::json doc{{"command", "estimate-r"},
                       {"margin", spec.to_json()},
                       {"analytic_r", split.r()},
                       {"estimate", estimate},
                       {"std_error", std_error},
                       {"draws", per_block * blocks},
                       {"seed", seed}};
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pairwise-independent sequences with a non-Gaussian limiting sample mean"};
    app.require_subcommand(1);

    std::string margin = "normal";
    std::string out_prefix = "piid_out";
    std::string m_grid_arg;
    std::string grid_arg;
    std::string format = "csv";
    int m = 100;
    int ell = 2;
    int reps = 10000;
    int workers = 0;
    int samples = 0;
    std::int64_t draws = 1'000'000;
    double r = 0.0;
    std::optional<std::uint64_t> seed;
    std::optional<double> quantile_p;
    bool gdist = false;

    auto* generate = app.add_subcommand("generate", "draw labels, indicators and the X sequence");
    generate->add_option("--margin", margin, "built-in margin or JSON file")->capture_default_str();
    generate->add_option("--m", m, "number of multinomial labels (n = m(m-1)/2)")->required();
    generate->add_option("--seed", seed, "64-bit seed (default: PIID_SEED or 1)");
    generate->add_option("--out", out_prefix, "output prefix")->capture_default_str();

    auto* limit = app.add_subcommand("limit", "evaluate the limiting law");
    limit->add_option("--ell", ell, "number of categories")->required();
    limit->add_option("--r", r, "shape parameter in [-1, 1]")->required();
    limit->add_option("--grid", grid_arg, "pdf/cdf grid as lo:hi:step");
    limit->add_option("--quantile", quantile_p, "print the quantile at this probability");
    limit->add_option("--samples", samples, "also write this many draws");
    limit->add_option("--seed", seed, "seed for --samples");
    limit->add_flag("--gaussian-distance", gdist, "report sup |cdf - Phi| on [-8, 8]");
    limit->add_option("--out", out_prefix, "output prefix")->capture_default_str();

    auto* verify = app.add_subcommand("verify", "exact enumeration of the indicator law");
    verify->add_option("--ell", ell, "number of categories")->required();
    verify->add_option("--m", m, "number of labels (ell^m <= 1e6)")->required();

    auto* converge = app.add_subcommand("converge", "convergence study of S_n");
    converge->add_option("--margin", margin, "built-in margin or JSON file")->capture_default_str();
    converge->add_option("--m-grid", m_grid_arg, "comma-separated increasing m values")->required();
    converge->add_option("--reps", reps, "replications per m")->capture_default_str();
    converge->add_option("--seed", seed, "64-bit master seed (default: PIID_SEED or 1)");
    converge->add_option("--workers", workers, "worker threads (0 = hardware)")->capture_default_str();
    converge->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    converge->add_option("--out", out_prefix, "output prefix")->capture_default_str();

    auto* estimate = app.add_subcommand("estimate-r", "analytic and Monte-Carlo r");
    estimate->add_option("--margin", margin, "built-in margin or JSON file")->capture_default_str();
    estimate->add_option("--draws", draws, "Monte-Carlo draws")->capture_default_str();
    estimate->add_option("--seed", seed, "64-bit seed (default: PIID_SEED or 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (generate->parsed()) return cmd_generate(margin, m, seed, out_prefix);
        if (limit->parsed())
            return cmd_limit(ell, r, grid_arg, quantile_p, samples, seed, gdist, out_prefix);
        if (verify->parsed()) return cmd_verify(ell, m);
        if (converge->parsed())
            return cmd_converge(margin, m_grid_arg, reps, seed, workers, format, out_prefix);
        if (estimate->parsed()) return cmd_estimate_r(margin, draws, seed);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const piid::NonIntegerReciprocalError& e) {
        std::cerr << "margin validation failed: " << e.what() << "\n";
        return kExitMargin;
    } catch (const piid::ZeroVarianceError& e) {
        std::cerr << "margin validation failed: " << e.what() << "\n";
        return kExitMargin;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}
