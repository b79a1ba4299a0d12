#include "bubble/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bubble/closed_form.hpp"
#include "bubble/figures.hpp"
#include "bubble/monte_carlo.hpp"
#include "bubble/pde.hpp"
#include "bubble/quadrature.hpp"
#include "bubble/validation.hpp"
#include "csv.hpp"

namespace bubble::cli {

namespace {

using nlohmann::json;

struct Field {
    std::string key;
    std::function<void(RunConfig&, const json&)> load;
    std::function<void(const RunConfig&, json&)> save;
    std::function<CLI::Option*(CLI::App&, RunConfig&)> add;
};

template <class T>
Field field(std::string key, T RunConfig::*member, std::string help) {
    Field fd;
    fd.key = key;
    fd.load = [key, member](RunConfig& c, const json& j) {
        try {
            c.*member = j.get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key '" + key + "' has the wrong type");
        }
    };
    fd.save = [key, member](const RunConfig& c, json& j) { j[key] = c.*member; };
    fd.add = [key, member, help](CLI::App& app, RunConfig& c) {
        return app.add_option("--" + key, c.*member, help)->capture_default_str();
    };
    return fd;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = {
        field("S", &RunConfig::S, "spot price"),
        field("f", &RunConfig::f, "current bubble level"),
        field("strike", &RunConfig::strike, "strike E"),
        field("tau", &RunConfig::tau, "time to expiry"),
        field("r", &RunConfig::r, "risk-free rate"),
        field("mu", &RunConfig::mu, "drift of S"),
        field("sigma", &RunConfig::sigma, "volatility of S"),
        field("gamma", &RunConfig::gamma, "bubble volatility (Gamma or Gamma_bar)"),
        field("muf", &RunConfig::muf, "bubble drift (mu_f or mu_f_bar)"),
        field("model", &RunConfig::model, "gaussian|lognormal|deterministic"),
        field("regime", &RunConfig::regime, "weak|strong|negsigma|full"),
        field("engine", &RunConfig::engine, "closed|quadrature|pde|mc"),
        field("contract", &RunConfig::contract, "call|put|bond|underlying"),
        field("chart", &RunConfig::chart, "frozen|moving (closed engine)"),
        field("grid-ns", &RunConfig::grid_ns, "S (or chart x) nodes"),
        field("grid-nf", &RunConfig::grid_nf, "f nodes"),
        field("grid-nt", &RunConfig::grid_nt, "time steps"),
        field("paths", &RunConfig::paths, "Monte Carlo paths"),
        field("steps", &RunConfig::steps, "Monte Carlo time steps"),
        field("seed", &RunConfig::seed, "master seed"),
        field("workers", &RunConfig::workers, "simulation threads, 0 = all cores"),
        field("drift", &RunConfig::drift, "pricing|physical (simulate)"),
        field("record", &RunConfig::record, "endpoints|full (simulate)"),
        field("out", &RunConfig::out, "output file or directory"),
    };
    return all;
}

void require_one_of(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed) {
        if (value == a) return;
    }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : "|") + a;
    throw ConfigError("--" + key + " must be one of " + list + ", got '" + value + "'");
}

MarketParams market(const RunConfig& c) { return MarketParams{c.mu, c.sigma, c.r}; }

BubbleModel bubble_model(const RunConfig& c) {
    if (c.model == "gaussian") return GaussianBubble{c.muf, c.gamma};
    if (c.model == "lognormal") return LognormalBubble{c.muf, c.gamma};
    const double f0 = c.f;
    const double slope = c.muf;
    return DeterministicBubble{[=](double, double t) { return f0 + slope * t; }};
}

BubbleKind model_kind(const RunConfig& c) {
    if (c.model == "gaussian") return BubbleKind::Gaussian;
    if (c.model == "lognormal") return BubbleKind::Lognormal;
    return BubbleKind::Deterministic;
}

Contract contract_of(const RunConfig& c) {
    if (c.contract == "call") return Contract{c.tau, call_payoff(c.strike), c.strike};
    if (c.contract == "put") return Contract{c.tau, put_payoff(c.strike), c.strike};
    if (c.contract == "bond") return Contract{c.tau, bond_payoff(), std::nullopt};
    return Contract{c.tau, underlying_payoff(), std::nullopt};
}

/// Output stream: the --out file if given, else `fallback`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
            os_ = file_.get();
        }
    }
    std::ostream& get() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

Grid2D full_grid(const RunConfig& c, const MarketParams& m) {
    const double lo = std::min(c.S, c.strike) / 20.0;
    const double hi = std::max(c.S, c.strike) * 20.0;
    auto s = log_axis(lo, hi, c.grid_ns, c.strike);
    std::vector<double> f;
    if (c.model == "lognormal") {
        const double w = 5.0 * c.gamma * std::sqrt(c.tau) + std::abs(c.muf) * c.tau + 0.5;
        f = linear_axis(c.f * std::exp(-w), c.f * std::exp(w), c.grid_nf, c.f);
    } else {
        const double w = std::max(5.0 * c.gamma * std::sqrt(c.tau) + std::abs(c.muf) * c.tau, 0.1 * c.sigma);
        f = linear_axis(c.f - w, c.f + w, c.grid_nf, c.f);
    }
    return Grid2D::make(std::move(s), std::move(f), c.grid_nt, m);
}

Grid1D line_grid(const RunConfig& c) {
    const double lo = std::min(c.S, c.strike) / 20.0;
    const double hi = std::max(c.S, c.strike) * 20.0;
    return Grid1D{log_axis(lo, hi, c.grid_ns, c.strike), c.grid_nt};
}

struct PriceResult {
    double price = 0.0;
    std::optional<double> std_error;
};

double pde_asymptotic(const RunConfig& c, const MarketParams& m, const Contract& contract) {
    const RegimeTag tag = parse_regime(c.regime);
    const AlphaPair a = alphas_for(tag, model_kind(c), m);
    // Chart coordinates with x + y = ln S / sigma; the payoffs offered here do not depend on f.
    const double x0 = std::log(c.S) / c.sigma;
    const double half = 6.0 * std::sqrt(c.tau) + std::abs(a.sum()) * c.tau;
    ChartGrid grid;
    grid.x = linear_axis(x0 - half, x0 + half, c.grid_ns, x0);
    grid.eta = {a.alpha_y * c.tau};
    grid.n_steps = c.grid_nt;
    grid.expiry = c.tau;
    const double f = c.f;
    const double sigma = c.sigma;
    auto terminal = [&](double x, double y) { return contract.payoff(std::exp(sigma * (x + y)), f); };
    SchemeOptions opt;
    opt.save_every = c.grid_nt;
    const auto v = solve_asymptotic(a, terminal, grid, opt);
    const auto it = std::find(v.x.begin(), v.x.end(), x0);
    const std::size_t i = static_cast<std::size_t>(it - v.x.begin());
    return regime_discount(tag, c.tau, m) * v.at(i, 0, v.tau.size() - 1);
}

PriceResult price(const RunConfig& c) {
    const MarketParams m = market(c);
    const Contract contract = contract_of(c);
    if (c.tau == 0.0) return {contract.payoff(c.S, c.f), std::nullopt};
    const RegimeTag tag = parse_regime(c.regime);
    if (tag == RegimeTag::Full && c.model != "deterministic") (void)potential_v(c.f, m);

    if (c.engine == "closed") {
        if (c.contract == "call") {
            const Chart chart = c.chart == "moving" ? Chart::Moving : Chart::Frozen;
            return {price_call(tag, model_kind(c), c.S, c.f, c.tau, m, c.strike, chart), std::nullopt};
        }
        if (c.contract == "bond") return {price_bond(tag, c.tau, m), std::nullopt};
        throw ConfigError("closed engine prices call and bond contracts only");
    }
    if (c.engine == "quadrature") {
        return {price_generic(tag, bubble_model(c), c.S, c.f, c.tau, m, contract.payoff), std::nullopt};
    }
    if (c.engine == "pde") {
        if (tag != RegimeTag::Full) return {pde_asymptotic(c, m, contract), std::nullopt};
        SchemeOptions opt;
        opt.save_every = c.grid_nt;
        if (c.model == "deterministic") {
            const auto b = std::get<DeterministicBubble>(bubble_model(c));
            const auto v = solve_deterministic(m, b.f, contract, line_grid(c), opt);
            return {v.interpolate(c.S, v.tau.size() - 1), std::nullopt};
        }
        const auto v = solve_full(m, bubble_model(c), contract, full_grid(c, m), opt);
        return {v.interpolate(c.S, c.f, v.tau.size() - 1), std::nullopt};
    }
    SimulationSpec spec;
    spec.S0 = c.S;
    spec.f0 = c.f;
    spec.expiry = c.tau;
    spec.steps = c.steps;
    spec.n_paths = c.paths;
    spec.rng.seed = c.seed;
    spec.workers = c.workers;
    const auto paths = simulate(m, bubble_model(c), spec);
    const auto fk = feynman_kac_price(m, contract, paths);
    return {fk.value, fk.std_error};
}

int cmd_price(const RunConfig& c, std::ostream& out) {
    const PriceResult p = price(c);
    Sink sink(c.out, out);
    std::ostream& os = sink.get();
    os << "engine,regime,S,f,tau,price" << (p.std_error ? ",stderr" : "") << '\n';
    os << c.engine << ',' << c.regime << ',' << csv::num(c.S) << ',' << csv::num(c.f) << ',' << csv::num(c.tau) << ','
       << csv::num(p.price);
    if (p.std_error) os << ',' << csv::num(*p.std_error);
    os << '\n';
    return kOk;
}

int cmd_surface(const RunConfig& c, std::ostream& out) {
    if (c.engine != "pde" || c.regime != "full") throw ConfigError("surface requires --engine pde --regime full");
    const MarketParams m = market(c);
    const Contract contract = contract_of(c);
    Sink sink(c.out, out);
    if (c.model == "deterministic") {
        const auto b = std::get<DeterministicBubble>(bubble_model(c));
        solve_deterministic(m, b.f, contract, line_grid(c)).write_csv(sink.get());
    } else {
        solve_full(m, bubble_model(c), contract, full_grid(c, m)).write_csv(sink.get());
    }
    return kOk;
}

int cmd_figures(const RunConfig& c, int figure, std::ostream& out) {
    FigureSpec spec = FigureSpec::published(figure);
    if (c.is_set("tau")) spec.tau = c.tau;
    if (c.is_set("r")) spec.params.r = c.r;
    if (c.is_set("mu")) spec.params.mu = c.mu;
    if (c.is_set("sigma")) spec.params.sigma = c.sigma;
    if (c.is_set("strike")) spec.strike = c.strike;
    if (c.is_set("chart")) spec.chart = c.chart == "moving" ? Chart::Moving : Chart::Frozen;
    const FigureData data = figure_data(spec);

    const std::filesystem::path dir = c.out.empty() ? std::filesystem::path(".") : std::filesystem::path(c.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = dir / ("figure" + std::to_string(figure) + ".csv");
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ConfigError("cannot write '" + path.string() + "'");
    data.write_csv(file);
    out << path.string() << '\n';
    return kOk;
}

int cmd_validate(const RunConfig& c, const std::string& suite, std::ostream& out) {
    ValidationConfig v;
    v.seed = c.seed;
    v.workers = c.workers;
    if (c.is_set("paths")) v.paths = c.paths;
    if (c.is_set("steps")) v.steps = c.steps;
    if (c.is_set("grid-ns")) v.grid_ns = c.grid_ns;
    if (c.is_set("grid-nf")) v.grid_nf = c.grid_nf;
    if (c.is_set("grid-nt")) v.grid_nt = c.grid_nt;
    const auto rows = run_suite(suite, v);
    Sink sink(c.out, out);
    write_report(sink.get(), rows);
    return all_pass(rows) ? kOk : kFailure;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    SimulationSpec spec;
    spec.S0 = c.S;
    spec.f0 = c.f;
    spec.expiry = c.tau;
    spec.steps = c.steps;
    spec.n_paths = c.paths;
    spec.rng.seed = c.seed;
    spec.workers = c.workers;
    spec.drift = c.drift == "physical" ? DriftMode::Physical : DriftMode::Pricing;
    spec.record = c.record == "full" ? RecordMode::Full : RecordMode::Endpoints;
    const auto paths = simulate(market(c), bubble_model(c), spec);
    Sink sink(c.out, out);
    paths.write_csv(sink.get());
    return kOk;
}

} // namespace

void validate_config(const RunConfig& c) {
    require_one_of("model", c.model, {"gaussian", "lognormal", "deterministic"});
    require_one_of("regime", c.regime, {"weak", "strong", "negsigma", "full"});
    require_one_of("engine", c.engine, {"closed", "quadrature", "pde", "mc"});
    require_one_of("contract", c.contract, {"call", "put", "bond", "underlying"});
    require_one_of("chart", c.chart, {"frozen", "moving"});
    require_one_of("drift", c.drift, {"pricing", "physical"});
    require_one_of("record", c.record, {"endpoints", "full"});
    for (double x : {c.S, c.f, c.strike, c.tau, c.r, c.mu, c.sigma, c.gamma, c.muf}) {
        if (!std::isfinite(x)) throw ConfigError("numeric parameters must be finite");
    }
    if (!(c.S > 0.0)) throw ConfigError("--S must be positive");
    if (!(c.strike > 0.0)) throw ConfigError("--strike must be positive");
    if (c.tau < 0.0) throw ConfigError("--tau must be non-negative");
    if (!(c.sigma > 0.0)) throw ConfigError("--sigma must be positive");
    if (c.gamma < 0.0) throw ConfigError("--gamma must be non-negative");
    if (c.grid_ns < 16 || c.grid_nf < 16 || c.grid_nt < 1) throw ConfigError("grids need >= 16 nodes and >= 1 step");
    if (c.paths < 1 || c.steps < 1) throw ConfigError("--paths and --steps must be positive");
    if (c.model == "lognormal" && !(c.f > 0.0)) throw ConfigError("lognormal bubble requires --f > 0");
    if (c.engine == "closed" && c.regime == "full") throw ConfigError("engine closed requires regime weak, strong or negsigma");
    if (c.engine == "quadrature" && c.regime == "full") throw ConfigError("engine quadrature requires an asymptotic regime");
    if (c.engine == "mc" && c.regime != "full") throw ConfigError("engine mc prices the full model: use --regime full");
    if (c.engine != "pde" && c.engine != "mc" && c.model == "deterministic") {
        throw ConfigError("deterministic bubbles are priced by the pde or mc engines only");
    }
    if (c.engine == "mc" && c.model == "deterministic") throw ConfigError("engine mc needs a stochastic bubble");
}

std::string to_json(const RunConfig& cfg) {
    json j = json::object();
    for (const auto& fd : fields()) fd.save(cfg, j);
    return j.dump(2);
}

void apply_json(RunConfig& cfg, const std::string& text, bool mark_explicit) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
    for (const auto& [key, value] : j.items()) {
        const auto& all = fields();
        const auto it = std::find_if(all.begin(), all.end(), [&](const Field& fd) { return fd.key == key; });
        if (it == all.end()) throw ConfigError("unknown config key '" + key + "'");
        it->load(cfg, value);
        if (mark_explicit) cfg.explicit_keys.insert(key);
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Option pricing with arbitrage bubbles", args.empty() ? "bubble" : args.front()};
    app.fallthrough();
    app.require_subcommand(0, 1);

    std::vector<std::pair<std::string, CLI::Option*>> options;
    for (const auto& fd : fields()) options.emplace_back(fd.key, fd.add(app, cfg));
    std::string config_path;
    bool dump = false;
    app.add_option("--config", config_path, "flat JSON config; flags override its values");
    app.add_flag("--dump-config", dump, "print the effective config as JSON and exit");

    auto* price_cmd = app.add_subcommand("price", "price one contract");
    auto* surface_cmd = app.add_subcommand("surface", "write the full price surface as CSV");
    auto* figures_cmd = app.add_subcommand("figures", "write the weak/strong curves of figure 1 or 2");
    int figure = 1;
    figures_cmd->add_option("figure", figure, "1 or 2")->required()->check(CLI::IsMember({1, 2}));
    auto* validate_cmd = app.add_subcommand("validate", "run a validation suite");
    std::string suite = "all";
    validate_cmd->add_option("suite", suite, "oracle|deterministic|reduction|asymptotic|mc|invariants|figures|all");
    auto* simulate_cmd = app.add_subcommand("simulate", "write simulated paths as CSV");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        for (const auto& [key, opt] : options) {
            if (opt->count() > 0) cfg.explicit_keys.insert(key);
        }
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw ConfigError("cannot read config '" + config_path + "'");
            std::stringstream text;
            text << in.rdbuf();
            // Flags win: only keys not given on the command line are taken from the file.
            RunConfig from_file = cfg;
            from_file.explicit_keys.clear();
            apply_json(from_file, text.str());
            for (const auto& fd : fields()) {
                if (!cfg.is_set(fd.key) && from_file.is_set(fd.key)) {
                    json j;
                    fd.save(from_file, j);
                    fd.load(cfg, j[fd.key]);
                    cfg.explicit_keys.insert(fd.key);
                }
            }
        }
        validate_config(cfg);
        if (dump) {
            out << to_json(cfg) << '\n';
            return kOk;
        }
        if (*figures_cmd) return cmd_figures(cfg, figure, out);
        if (*validate_cmd) {
            const auto names = suite_names();
            if (std::find(names.begin(), names.end(), suite) == names.end()) {
                throw ConfigError("unknown validation suite '" + suite + "'");
            }
            return cmd_validate(cfg, suite, out);
        }
        if (*price_cmd) return cmd_price(cfg, out);
        if (*surface_cmd) return cmd_surface(cfg, out);
        if (*simulate_cmd) return cmd_simulate(cfg, out);
        err << app.help();
        return kConfigError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const BubbleError& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

} // namespace bubble::cli
