#include "vinecast/config.hpp"
#include "vinecast/error.hpp"
#include "vinecast/evaluation.hpp"
#include "vinecast/forecast_engine.hpp"
#include "vinecast/io.hpp"
#include "vinecast/matrix_core.hpp"
#include "vinecast/pcor_algebra.hpp"
#include "vinecast/rng.hpp"
#include "vinecast/structure_select.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vinecast;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr const char* kManifest = "manifest.json";

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string out = ".";
};

/// Collects what a command read and wrote, then emits the manifest.
class Manifest {
public:
    Manifest(std::string command, const Globals& g) : command_(std::move(command)), out_(g.out) {
        fs::create_directories(out_);
    }

    void input(const std::string& path) { inputs_[fs::path(path).filename().string()] = file_digest(path); }
    void config(const RunConfig& cfg) {
        config_hash_ = hex_digest(fnv1a(to_json(cfg).dump()));
        seed_ = cfg.pipeline.root_seed;
    }
    void set(const std::string& key, json value) { extra_[key] = std::move(value); }

    /// Writes `text` to out/name and records it.
    void write(const std::string& name, const std::string& text) {
        const fs::path p = fs::path(out_) / name;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_text(p.string(), text);
        outputs_.push_back(name);
    }
    void write_json(const std::string& name, json j) {
        j["manifest"] = kManifest;
        write(name, j.dump(2) + "\n");
    }

    void finish() const {
        json j = {{"tool", "vinecast"},
                  {"version", kVersion},
                  {"command", command_},
                  {"config_hash", config_hash_},
                  {"root_seed", seed_},
                  {"inputs", inputs_},
                  {"outputs", outputs_}};
        for (const auto& [k, v] : extra_.items()) j[k] = v;
        write_text((fs::path(out_) / kManifest).string(), j.dump(2) + "\n");
    }

private:
    std::string command_;
    std::string out_;
    std::string config_hash_;
    std::uint64_t seed_ = 0;
    std::map<std::string, std::string> inputs_;
    std::vector<std::string> outputs_;
    json extra_ = json::object();
};

std::string csv_header(const std::string& columns) { return std::string("# manifest=") + kManifest + "\n" + columns + "\n"; }

RunConfig load_config(const Globals& g) {
    RunConfig cfg = g.config_path.empty() ? parse_run_config(json::object()) : load_run_config(g.config_path);
    if (g.seed) cfg.pipeline.root_seed = *g.seed;
    cfg.pipeline.jobs = g.jobs;
    return cfg;
}

std::string next_day_label(const std::vector<std::string>& days) {
    const std::string& last = days.back();
    const bool numeric = !last.empty() && std::all_of(last.begin(), last.end(), [](char c) { return c >= '0' && c <= '9'; });
    return numeric ? std::to_string(std::stoll(last) + 1) : last + "+1";
}

std::string forecasts_csv(const std::vector<ForecastRecord>& records, const CovSeries& data) {
    std::ostringstream out;
    out << csv_header("day,row_asset,col_asset,value");
    for (const auto& rec : records) {
        const std::string day = rec.day <= static_cast<long>(data.days.size()) ? data.days[rec.day - 1]
                                                                               : next_day_label(data.days);
        const auto& y = rec.predicted;
        for (int i = 0; i < y.dim(); ++i) {
            for (int j = i; j < y.dim(); ++j) {
                out << day << ',' << data.assets[i] << ',' << data.assets[j] << ',' << format_number(y(i, j)) << '\n';
            }
        }
    }
    return out.str();
}

std::vector<std::string> component_ids(const TransformMeta& meta, const std::vector<std::string>& assets) {
    std::vector<std::string> ids;
    if (meta.kind == TransformKind::Pcv) {
        for (const auto& a : assets) ids.push_back("VAR:" + a);
        for (const auto& c : meta.structure->flat_constraints()) ids.push_back("\"PCOR:" + to_string(c, assets) + "\"");
        return ids;
    }
    for (int i = 0; i < meta.dim; ++i) {
        for (int j = i; j < meta.dim; ++j) {
            ids.push_back("\"CHOL:" + assets[meta.asset_order[i]] + "," + assets[meta.asset_order[j]] + "\"");
        }
    }
    return ids;
}

json structure_json(const RVineStructure& s, const std::vector<std::string>& assets) {
    json j = to_json(s);
    j["assets"] = assets;
    return j;
}

// ---------------------------------------------------------------- commands

void cmd_ingest(const Globals& g, const std::string& input, int stride, int shifts, bool keep_partial) {
    Manifest manifest("ingest", g);
    manifest.input(input);
    const IntradayData data = read_intraday_csv(input);
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
    const int d = static_cast<int>(data.assets.size());
    const IntradayPanel panel(d, data.returns);
    CovSeries out;
    out.assets = data.assets;
    out.days = data.days;
    for (std::size_t t = 0; t < panel.days(); ++t) {
        out.matrices.push_back(stride == 1 && shifts == 1
                                   ? realized_cov(panel, t)
                                   : realized_cov_subsampled(panel, stride, shifts, t, !keep_partial));
    }
    manifest.set("grid", {{"stride", stride}, {"shifts", shifts}, {"drop_partial_intervals", !keep_partial}});
    manifest.set("skipped_days", data.warnings);
    manifest.write("realized_cov.csv", cov_csv(out, kManifest));
    manifest.finish();
}

void cmd_select_structure(const Globals& g, const std::string& input, const std::string& weights, double lambda,
                          const std::string& method) {
    Manifest manifest("select-structure", g);
    manifest.input(input);
    const CovSeries data = read_cov_csv(input);
    std::vector<CorrMatrix> corrs;
    for (const auto& y : data.matrices) corrs.push_back(split_cov(y).second);
    AveragingScheme scheme;
    if (weights == "ewma") {
        scheme = AveragingScheme::ewma(lambda);
    } else if (weights != "empirical") {
        throw Error(ErrorCode::ConfigError, "--weights must be empirical or ewma");
    }
    const int d = static_cast<int>(data.assets.size());
    const EdgeWeightFn fn = weights_from_average(average_corr(corrs, scheme));
    std::ostringstream audit;
    audit << csv_header("level,conditioning,pair,weight,selected");
    std::optional<RVineStructure> structure;
    if (method == "mst") {
        const Selection sel = select_structure_mst(d, fn);
        for (const auto& row : sel.audit) {
            std::string conditioning;
            for (std::size_t k = 0; k < row.constraint.conditioning.size(); ++k) {
                conditioning += (k ? ";" : "") + data.assets[row.constraint.conditioning[k]];
            }
            audit << row.constraint.level << ',' << conditioning << ',' << data.assets[row.constraint.i] << ';'
                  << data.assets[row.constraint.j] << ',' << format_number(row.weight) << ','
                  << (row.selected ? 1 : 0) << '\n';
        }
        structure = sel.structure;
    } else if (method == "cvine_min") {
        structure = select_cvine_min(d, fn);
    } else if (method == "random") {
        structure = sample_random_rvine(d, g.seed.value_or(0));
    } else {
        throw Error(ErrorCode::ConfigError, "--method must be mst, cvine_min or random");
    }
    manifest.write_json("structure.json", structure_json(*structure, data.assets));
    if (method == "mst") manifest.write("weight_audit.csv", audit.str());
    manifest.finish();
}

void cmd_transform(const Globals& g, const std::string& input, const std::string& structure_path) {
    Manifest manifest("transform", g);
    manifest.input(input);
    RunConfig cfg = load_config(g);
    manifest.config(cfg);
    const CovSeries data = read_cov_csv(input);
    cfg.resolve_assets(data.assets);
    TransformMeta meta;
    if (!structure_path.empty()) {
        manifest.input(structure_path);
        meta.kind = TransformKind::Pcv;
        meta.dim = static_cast<int>(data.assets.size());
        json sj;
        try {
            sj = json::parse(read_text(structure_path));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ConfigError, structure_path + ": " + e.what());
        }
        meta.structure = structure_from_json(sj);
        if (meta.structure->dim() != meta.dim) throw Error(ErrorCode::ConfigError, "structure dimension mismatch");
    } else {
        meta = select_transform(data.matrices, cfg.pipeline.transform, cfg.pipeline.root_seed);
    }
    const ComponentSeries comps = step_s1(data.matrices, meta);
    const auto ids = component_ids(meta, data.assets);
    std::ostringstream out;
    out << csv_header("day,component_id,value");
    for (Eigen::Index t = 0; t < comps.values.rows(); ++t) {
        for (Eigen::Index c = 0; c < comps.values.cols(); ++c) {
            out << data.days[t] << ',' << ids[c] << ',' << format_number(comps.values(t, c)) << '\n';
        }
    }
    manifest.write("components.csv", out.str());
    if (meta.structure) manifest.write_json("structure.json", structure_json(*meta.structure, data.assets));
    manifest.finish();
}

json margin_json(const MarginModel& m) {
    json j = {{"spec", m.spec().to_string()}, {"first_row", m.first()}, {"warnings", m.warnings()}};
    if (m.mean_part()) j["mean"] = {{"mean", m.mean_part()->mean}, {"sd", m.mean_part()->sd}};
    if (m.har_part()) {
        const auto& c = m.har_part()->coef;
        j["har"] = {{"intercept", c(0)}, {"daily", c(1)}, {"weekly", c(2)}, {"monthly", c(3)},
                    {"residual_sd", m.har_part()->residual_sd}};
    }
    if (m.arfima_part()) {
        const auto& a = *m.arfima_part();
        j["arfima"] = {{"mu", a.mu},
                       {"d", a.d},
                       {"ar", std::vector<double>(a.ar.data(), a.ar.data() + a.ar.size())},
                       {"ma", std::vector<double>(a.ma.data(), a.ma.data() + a.ma.size())},
                       {"residual_sd", a.residual_sd},
                       {"boundary_d", a.boundary_d}};
    }
    if (m.garch_part()) {
        const auto& gp = *m.garch_part();
        j["garch"] = {{"omega", gp.omega}, {"alpha", gp.alpha}, {"beta", gp.beta}};
        if (gp.sged) j["garch"]["sged"] = {{"nu", gp.sged->nu}, {"xi", gp.sged->xi}};
    }
    return j;
}

struct FullFit {
    CovSeries data;
    RunConfig cfg;
    ComponentSeries components;
    FittedModel fitted;
};

FullFit fit_all(const Globals& g, const std::string& input, Manifest& manifest) {
    manifest.input(input);
    RunConfig cfg = load_config(g);
    manifest.config(cfg);
    CovSeries data = read_cov_csv(input);
    cfg.resolve_assets(data.assets);
    const int warmup = cfg.windows.warmup_days;
    if (static_cast<int>(data.matrices.size()) <= warmup + 1) {
        throw Error(ErrorCode::InvalidArgument, "series shorter than the warmup period");
    }
    const std::vector<CovMatrix> training(data.matrices.begin() + warmup, data.matrices.end());
    const std::uint64_t seed = derive_seed(cfg.pipeline.root_seed, data.matrices.size() + 1);
    const TransformMeta meta = select_transform(training, cfg.pipeline.transform, seed);
    ComponentSeries comps = step_s1(data.matrices, meta);
    FittedModel fitted =
        step_s2_fit(comps, cfg.pipeline.margins, cfg.pipeline.dependence, warmup, cfg.pipeline.jobs);
    return {std::move(data), std::move(cfg), std::move(comps), std::move(fitted)};
}

void cmd_fit(const Globals& g, const std::string& input) {
    Manifest manifest("fit", g);
    FullFit f = fit_all(g, input, manifest);
    json margins = json::array();
    const auto ids = component_ids(f.fitted.meta, f.data.assets);
    for (std::size_t c = 0; c < f.fitted.margins.size(); ++c) {
        json m = margin_json(f.fitted.margins[c]);
        std::string id = ids[c];
        id.erase(std::remove(id.begin(), id.end(), '"'), id.end());
        m["component"] = id;
        margins.push_back(m);
    }
    json model = {{"transform", f.fitted.meta.kind == TransformKind::Pcv ? "pcv" : "cholesky"},
                  {"margins", margins},
                  {"copula", to_json(f.fitted.copula)},
                  {"warnings", f.fitted.warnings}};
    if (f.fitted.meta.structure) model["structure"] = structure_json(*f.fitted.meta.structure, f.data.assets);
    manifest.write_json("model.json", model);
    manifest.finish();
}

void cmd_forecast(const Globals& g, const std::string& input) {
    Manifest manifest("forecast", g);
    FullFit f = fit_all(g, input, manifest);
    const std::uint64_t seed = derive_seed(f.cfg.pipeline.root_seed, f.data.matrices.size() + 1);
    ForecastRecord rec = step_s3_forecast(f.fitted, f.components, f.cfg.pipeline.n_replications, seed);
    manifest.set("forecast_seed", seed);
    manifest.write("forecast.csv", forecasts_csv({rec}, f.data));
    manifest.finish();
}

void cmd_backtest(const Globals& g, const std::string& input, const std::string& naive, double lambda,
                  int first_window, int last_window) {
    Manifest manifest("backtest", g);
    manifest.input(input);
    RunConfig cfg = load_config(g);
    manifest.config(cfg);
    const CovSeries data = read_cov_csv(input);
    cfg.resolve_assets(data.assets);
    const auto plan = plan_windows(static_cast<int>(data.matrices.size()), cfg.windows);
    if (plan.empty()) throw Error(ErrorCode::InvalidArgument, "series too short for a single window");

    std::vector<ForecastRecord> records;
    json windows = json::array();
    if (!naive.empty()) {
        NaiveSpec spec;
        spec.lambda = lambda;
        if (naive == "previous_day") {
            spec.kind = NaiveKind::PreviousDay;
        } else if (naive == "train_mean") {
            spec.kind = NaiveKind::TrainMean;
        } else if (naive == "riskmetrics") {
            spec.kind = NaiveKind::RiskMetrics;
        } else {
            throw Error(ErrorCode::ConfigError, "--naive must be previous_day, train_mean or riskmetrics");
        }
        records = naive_backtest(data.matrices, spec, cfg.windows);
        manifest.set("naive", {{"kind", naive}, {"lambda", lambda}});
    } else {
        BacktestResult result = run_backtest(data.matrices, cfg.pipeline, cfg.windows, first_window, last_window);
        for (const auto& rep : result.windows) {
            char name[64];
            std::snprintf(name, sizeof name, "windows/window_%03d.json", rep.window.index);
            json wj = {{"window", rep.window.index}, {"warnings", rep.warnings}};
            if (rep.transform->structure) wj["structure"] = structure_json(*rep.transform->structure, data.assets);
            if (rep.copula) wj["copula"] = to_json(*rep.copula);
            manifest.write_json(name, wj);
            windows.push_back({{"index", rep.window.index},
                               {"first_day", data.days[rep.window.forecast_begin]},
                               {"days", rep.window.days()},
                               {"truncated", rep.window.truncated(cfg.windows)},
                               {"seed", rep.seed},
                               {"file", name}});
        }
        records = std::move(result.records);
    }
    manifest.set("windows", windows);
    manifest.set("window_count", plan.size());
    manifest.set("final_window_truncated", plan.back().truncated(cfg.windows));
    manifest.set("forecast_count", records.size());
    manifest.write("forecasts.csv", forecasts_csv(records, data));
    manifest.finish();
}

/// Forecast file -> matrices keyed by day label, using the asset order of `assets`.
std::map<std::string, Eigen::MatrixXd> read_forecasts(const std::string& path, const std::vector<std::string>& assets) {
    const CovSeries f = read_cov_csv(path);
    if (f.assets != assets) throw Error(ErrorCode::ConfigError, path + ": assets differ from the realized series");
    std::map<std::string, Eigen::MatrixXd> out;
    for (std::size_t t = 0; t < f.days.size(); ++t) out[f.days[t]] = f.matrices[t].values();
    return out;
}

void cmd_evaluate(const Globals& g, const std::string& actual_path, const std::vector<std::string>& forecast_args,
                  double alpha, int block, int n_boot) {
    Manifest manifest("evaluate", g);
    manifest.input(actual_path);
    const CovSeries actual = read_cov_csv(actual_path);
    std::vector<std::string> labels;
    std::vector<std::map<std::string, Eigen::MatrixXd>> forecasts;
    for (const auto& arg : forecast_args) {
        const auto eq = arg.find('=');
        const std::string label = eq == std::string::npos ? fs::path(arg).stem().string() : arg.substr(0, eq);
        const std::string path = eq == std::string::npos ? arg : arg.substr(eq + 1);
        manifest.input(path);
        labels.push_back(label);
        forecasts.push_back(read_forecasts(path, actual.assets));
    }
    // Days forecast by every model and observed.
    std::vector<std::size_t> rows;
    for (std::size_t t = 0; t < actual.days.size(); ++t) {
        if (std::all_of(forecasts.begin(), forecasts.end(), [&](const auto& f) { return f.count(actual.days[t]); })) {
            rows.push_back(t);
        }
    }
    if (rows.size() < 2) throw Error(ErrorCode::InvalidArgument, "fewer than two common forecast days");
    LossPanel panel{labels, Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels.size()))};
    std::vector<double> rmse;
    for (std::size_t m = 0; m < labels.size(); ++m) {
        std::vector<Eigen::MatrixXd> f;
        std::vector<Eigen::MatrixXd> a;
        for (std::size_t t : rows) {
            f.push_back(forecasts[m].at(actual.days[t]));
            a.push_back(actual.matrices[t].values());
        }
        panel.losses.col(static_cast<Eigen::Index>(m)) = frobenius_losses(f, a);
        rmse.push_back(rmse_frobenius(f, a));
    }
    McsOptions opts;
    opts.alpha = alpha;
    opts.block_length = block;
    opts.n_boot = n_boot;
    opts.seed = g.seed.value_or(0);
    opts.jobs = g.jobs;
    const McsResult res = mcs(panel, opts);

    std::ostringstream table;
    table << csv_header("model,rmse_frobenius,mcs_p_value,in_mcs");
    const std::set<int> superior(res.superior.begin(), res.superior.end());
    for (std::size_t m = 0; m < labels.size(); ++m) {
        table << labels[m] << ',' << format_number(rmse[m]) << ',' << format_number(res.p_values[m]) << ','
              << (superior.count(static_cast<int>(m)) ? 1 : 0) << '\n';
    }
    std::ostringstream order;
    order << csv_header("step,eliminated,p_value");
    for (std::size_t k = 0; k < res.eliminated.size(); ++k) {
        order << k + 1 << ',' << labels[res.eliminated[k]] << ',' << format_number(res.p_values[res.eliminated[k]])
              << '\n';
    }
    manifest.set("evaluated_days", rows.size());
    manifest.set("mcs", {{"alpha", alpha}, {"block_length", block}, {"n_boot", n_boot}, {"seed", opts.seed}});
    manifest.write("rmse.csv", table.str());
    manifest.write("mcs.csv", order.str());
    manifest.finish();
}

void cmd_frontier(const Globals& g, const std::string& forecast_path, const std::string& actual_path,
                  const std::string& returns_path, const std::vector<double>& annual_targets, int mu_window) {
    Manifest manifest("frontier", g);
    manifest.input(forecast_path);
    manifest.input(actual_path);
    manifest.input(returns_path);
    const CovSeries actual = read_cov_csv(actual_path);
    const auto forecasts = read_forecasts(forecast_path, actual.assets);
    const ReturnSeries returns = read_returns_csv(returns_path);
    if (returns.assets != actual.assets) throw Error(ErrorCode::ConfigError, "return assets differ");
    std::map<std::string, int> return_row;
    for (std::size_t t = 0; t < returns.days.size(); ++t) return_row[returns.days[t]] = static_cast<int>(t);

    std::vector<CovMatrix> predicted;
    std::vector<CovMatrix> realized;
    std::vector<Eigen::VectorXd> mu;
    std::vector<int> rows;
    for (std::size_t t = 0; t < actual.days.size(); ++t) {
        const auto f = forecasts.find(actual.days[t]);
        const auto r = return_row.find(actual.days[t]);
        if (f == forecasts.end() || r == return_row.end() || r->second < mu_window) continue;
        predicted.emplace_back(f->second);
        realized.push_back(actual.matrices[t]);
        mu.push_back(expected_returns(returns.values, r->second - mu_window, r->second));
        rows.push_back(r->second);
    }
    if (predicted.empty()) throw Error(ErrorCode::InvalidArgument, "no forecast day has a full return window");
    Eigen::MatrixXd realized_returns(static_cast<Eigen::Index>(rows.size()), returns.values.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) realized_returns.row(static_cast<Eigen::Index>(k)) = returns.values.row(rows[k]);

    std::ostringstream expected;
    std::ostringstream expost;
    expected << csv_header("target_return,expected_sd");
    expost << csv_header("target_return,avg_realized_return,avg_realized_sd");
    for (double annual : annual_targets) {
        const double daily = annual / kTradingDays;
        const auto curve = efficient_frontier(predicted, mu, {daily});
        std::vector<Eigen::VectorXd> weights;
        for (std::size_t t = 0; t < predicted.size(); ++t) weights.push_back(min_variance_weights(predicted[t], mu[t], daily));
        const ExPost ep = expost_frontier(weights, realized_returns, realized);
        expected << format_number(annual) << ',' << format_number(std::sqrt(kTradingDays) * curve.front().expected_sd)
                 << '\n';
        expost << format_number(annual) << ',' << format_number(ep.avg_return_annual) << ','
               << format_number(ep.avg_sd_annual) << '\n';
    }
    manifest.set("annualization", kTradingDays);
    manifest.set("mu_window", mu_window);
    manifest.write("frontier_expected.csv", expected.str());
    manifest.write("frontier_expost.csv", expost.str());
    manifest.finish();
}

int report(ErrorCode code, const std::string& message) {
    std::cerr << json{{"error", std::string(to_string(code))}, {"message", message}}.dump() << '\n';
    return code == ErrorCode::ConfigError ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vinecast: realized covariance forecasting with partial correlation vines"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed_value = 0;
    app.add_option("--config", g.config_path, "JSON run configuration");
    auto* seed_opt = app.add_option("--seed", seed_value, "root random seed (overrides the config)");
    app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output directory");
    app.set_version_flag("--version", kVersion);

    std::string input;
    auto* ingest = app.add_subcommand("ingest", "intraday returns -> realized covariance CSV");
    int stride = 1;
    int shifts = 1;
    bool keep_partial = false;
    ingest->add_option("--input", input, "intraday CSV (day,period,asset,log_return)")->required();
    ingest->add_option("--stride", stride, "fine periods per coarse interval")->check(CLI::PositiveNumber);
    ingest->add_option("--shifts", shifts, "number of shifted grids averaged")->check(CLI::PositiveNumber);
    ingest->add_flag("--keep-partial", keep_partial, "keep partial first/last intervals");

    auto* select = app.add_subcommand("select-structure", "choose the data-transform vine");
    std::string weights = "empirical";
    double lambda = 0.97;
    std::string method = "mst";
    select->add_option("--input", input, "realized covariance CSV")->required();
    select->add_option("--weights", weights, "empirical | ewma");
    select->add_option("--lambda", lambda, "EWMA decay");
    select->add_option("--method", method, "mst | cvine_min | random");

    auto* transform = app.add_subcommand("transform", "covariance series -> component series");
    std::string structure_path;
    transform->add_option("--input", input, "realized covariance CSV")->required();
    transform->add_option("--structure", structure_path, "structure JSON (pcv path)");

    auto* fit = app.add_subcommand("fit", "fit margins and copula on the full series");
    fit->add_option("--input", input, "realized covariance CSV")->required();

    auto* forecast = app.add_subcommand("forecast", "one-day-ahead forecast after the last observed day");
    forecast->add_option("--input", input, "realized covariance CSV")->required();

    auto* backtest = app.add_subcommand("backtest", "moving-window out-of-sample forecasts");
    std::string naive;
    double naive_lambda = 0.94;
    int first_window = 0;
    int last_window = -1;
    backtest->add_option("--input", input, "realized covariance CSV")->required();
    backtest->add_option("--naive", naive, "previous_day | train_mean | riskmetrics");
    backtest->add_option("--lambda", naive_lambda, "RiskMetrics smoothing parameter");
    backtest->add_option("--first-window", first_window, "first window index");
    backtest->add_option("--last-window", last_window, "one past the last window index (-1 = all)");

    auto* evaluate = app.add_subcommand("evaluate", "RMSE and model confidence set");
    std::string actual;
    std::vector<std::string> forecast_files;
    double alpha = 0.10;
    int block = 22;
    int n_boot = 2000;
    evaluate->add_option("--actual", actual, "realized covariance CSV")->required();
    evaluate->add_option("--forecast", forecast_files, "label=forecast CSV (repeatable)")->required();
    evaluate->add_option("--alpha", alpha, "MCS level");
    evaluate->add_option("--block", block, "mean bootstrap block length");
    evaluate->add_option("--n-boot", n_boot, "bootstrap resamples");

    auto* frontier = app.add_subcommand("frontier", "expected and ex-post efficient frontiers");
    std::string forecast_file;
    std::string returns_file;
    std::vector<double> targets = {0.075, 0.10, 0.125, 0.15};
    int mu_window = 502;
    frontier->add_option("--forecast", forecast_file, "forecast CSV")->required();
    frontier->add_option("--actual", actual, "realized covariance CSV")->required();
    frontier->add_option("--returns", returns_file, "daily returns CSV (day,asset,return)")->required();
    frontier->add_option("--targets", targets, "annualized target returns")->delimiter(',');
    frontier->add_option("--mu-window", mu_window, "days in the expected-return window")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (*seed_opt) g.seed = seed_value;

    try {
        if (*ingest) cmd_ingest(g, input, stride, shifts, keep_partial);
        if (*select) cmd_select_structure(g, input, weights, lambda, method);
        if (*transform) cmd_transform(g, input, structure_path);
        if (*fit) cmd_fit(g, input);
        if (*forecast) cmd_forecast(g, input);
        if (*backtest) cmd_backtest(g, input, naive, naive_lambda, first_window, last_window);
        if (*evaluate) cmd_evaluate(g, actual, forecast_files, alpha, block, n_boot);
        if (*frontier) cmd_frontier(g, forecast_file, actual, returns_file, targets, mu_window);
    } catch (const Error& e) {
        return report(e.code(), e.what());
    } catch (const json::exception& e) {
        return report(ErrorCode::ConfigError, e.what());
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
    return 0;
}
