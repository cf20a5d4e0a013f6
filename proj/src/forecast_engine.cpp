#include "vinecast/forecast_engine.hpp"

#include "vinecast/error.hpp"
#include "vinecast/parallel.hpp"
#include "vinecast/pcor_algebra.hpp"
#include "vinecast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

namespace vinecast {

namespace {

// Successive caps on back-transformed partial correlations.
constexpr double kRhoCaps[] = {1.0 - 2e-7, 0.999, 0.99, 0.95, 0.9, 0.8, 0.5, 0.0};

int upper_index(int dim, int i, int j) { return i * dim - i * (i - 1) / 2 + (j - i); }

std::vector<int> full_order(const std::vector<int>& order, int dim) {
    if (order.empty()) {
        std::vector<int> identity(static_cast<std::size_t>(dim));
        std::iota(identity.begin(), identity.end(), 0);
        return identity;
    }
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < dim; ++k) {
        if (static_cast<int>(sorted.size()) != dim || sorted[k] != k) {
            throw Error(ErrorCode::ConfigError, "asset order must be a permutation of 0..d-1");
        }
    }
    return order;
}

}  // namespace

const MarginSpec& MarginLadder::operator[](ComponentClass c) const {
    switch (c) {
        case ComponentClass::Variance: return variances;
        case ComponentClass::Tree1: return tree1;
        case ComponentClass::Tree2To3: return tree2_3;
        case ComponentClass::Tree4Plus: return tree4_plus;
    }
    return variances;
}

void PipelineConfig::validate() const {
    if (n_replications < 1) throw Error(ErrorCode::ConfigError, "n_replications must be at least 1");
    if (bias.enabled && bias.s_days < 1) throw Error(ErrorCode::ConfigError, "bias correction needs s_days >= 1");
    if (jobs < 1) throw Error(ErrorCode::ConfigError, "jobs must be at least 1");
    if (transform.kind == TransformKind::Pcv && transform.selection.kind == SelectionKind::Fixed &&
        !transform.selection.fixed) {
        throw Error(ErrorCode::ConfigError, "fixed selection needs a structure");
    }
    if (!(dependence.test_level > 0.0 && dependence.test_level < 1.0)) {
        throw Error(ErrorCode::ConfigError, "independence test level must lie in (0, 1)");
    }
}

void WindowConfig::validate() const {
    if (train_days < 1 || test_days < 1 || warmup_days < 1) {
        throw Error(ErrorCode::ConfigError, "window lengths must be positive");
    }
}

int component_count(int dim) { return dim * (dim + 1) / 2; }

std::vector<ComponentClass> component_classes(const TransformMeta& meta) {
    const int d = meta.dim;
    if (meta.kind == TransformKind::Cholesky) {
        return std::vector<ComponentClass>(static_cast<std::size_t>(component_count(d)), ComponentClass::Variance);
    }
    std::vector<ComponentClass> classes(static_cast<std::size_t>(d), ComponentClass::Variance);
    for (int level = 1; level < d; ++level) {
        const auto c = level == 1 ? ComponentClass::Tree1
                                  : (level <= 3 ? ComponentClass::Tree2To3 : ComponentClass::Tree4Plus);
        classes.insert(classes.end(), static_cast<std::size_t>(d - level), c);
    }
    return classes;
}

std::vector<int> default_dependent_subset(const TransformMeta& meta) {
    const int d = meta.dim;
    std::vector<int> subset;
    if (meta.kind == TransformKind::Pcv) {
        for (int c = 0; c < 2 * d - 1; ++c) subset.push_back(c);
        return subset;
    }
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            if (i == j || i == 0) subset.push_back(upper_index(d, i, j));
        }
    }
    std::sort(subset.begin(), subset.end());
    return subset;
}

TransformMeta select_transform(const std::vector<CovMatrix>& training, const TransformConfig& config,
                               std::uint64_t window_seed) {
    if (training.empty()) throw Error(ErrorCode::InvalidArgument, "empty training sample");
    TransformMeta meta;
    meta.kind = config.kind;
    meta.dim = training.front().dim();
    if (meta.dim < 2) throw Error(ErrorCode::InvalidArgument, "at least two assets required");
    if (config.kind == TransformKind::Cholesky) {
        meta.asset_order = full_order(config.asset_order, meta.dim);
        return meta;
    }
    const auto& sel = config.selection;
    if (sel.kind == SelectionKind::Fixed) {
        if (!sel.fixed || sel.fixed->dim() != meta.dim) {
            throw Error(ErrorCode::ConfigError, "fixed structure dimension does not match the data");
        }
        meta.structure = *sel.fixed;
        return meta;
    }
    if (sel.kind == SelectionKind::Random) {
        meta.structure = sample_random_rvine(meta.dim, derive_seed(sel.seed, window_seed));
        return meta;
    }
    std::vector<CorrMatrix> corrs;
    corrs.reserve(training.size());
    for (const auto& y : training) corrs.push_back(split_cov(y).second);
    const EdgeWeightFn weight = sel.source == PartialWeightSource::FromAverage
                                    ? weights_from_average(average_corr(corrs, sel.scheme))
                                    : weights_from_daily(corrs, sel.scheme);
    meta.structure = sel.kind == SelectionKind::Mst ? select_structure_mst(meta.dim, weight).structure
                                                    : select_cvine_min(meta.dim, weight);
    return meta;
}

Eigen::VectorXd to_components(const CovMatrix& y, const TransformMeta& meta) {
    const int d = meta.dim;
    if (y.dim() != d) throw Error(ErrorCode::InvalidArgument, "matrix dimension does not match the transform");
    Eigen::VectorXd x(component_count(d));
    if (meta.kind == TransformKind::Pcv) {
        const auto [variances, r] = split_cov(y);
        x.head(d) = variances.values().array().log();
        const PcorVector p = corr_to_pcv(r, *meta.structure);
        for (int k = 0; k < p.size(); ++k) x(d + k) = fisher_z(p.values()(k));
        return x;
    }
    Eigen::MatrixXd permuted(d, d);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) permuted(a, b) = y(meta.asset_order[a], meta.asset_order[b]);
    }
    const UpperTriangular c = cholesky_decompose(CovMatrix(permuted));
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) x(upper_index(d, i, j)) = c(i, j);
    }
    return x;
}

Eigen::MatrixXd from_components_raw(const Eigen::VectorXd& x, const TransformMeta& meta) {
    const int d = meta.dim;
    if (x.size() != component_count(d)) throw Error(ErrorCode::InvalidArgument, "component vector has the wrong size");
    if (meta.kind == TransformKind::Pcv) {
        const Eigen::VectorXd sd = (0.5 * x.head(d).array()).exp();
        Eigen::VectorXd rho(x.size() - d);
        for (Eigen::Index k = 0; k < rho.size(); ++k) rho(k) = fisher_z_inv(x(d + k));
        // Near-unit partial correlations can push the smallest eigenvalue below
        // the PD margin; tighten the cap until the rebuilt matrix clears it.
        for (std::size_t attempt = 0;; ++attempt) {
            const double cap = kRhoCaps[attempt];
            const bool last = attempt + 1 == std::size(kRhoCaps);
            try {
                const CorrMatrix r = pcv_to_corr(PcorVector(*meta.structure, rho.cwiseMax(-cap).cwiseMin(cap)));
                const Eigen::MatrixXd scaled = sd.asDiagonal() * r.values() * sd.asDiagonal();
                const Eigen::MatrixXd y = 0.5 * (scaled + scaled.transpose());
                if (last || smallest_eigenvalue(y) > kPdEpsilon) return y;
            } catch (const Error&) {
                if (last) throw;
            }
        }
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) c(i, j) = x(upper_index(d, i, j));
    }
    Eigen::MatrixXd permuted(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k <= i; ++k) s += c(k, i) * c(k, j);
            permuted(i, j) = s;
            permuted(j, i) = s;
        }
    }
    Eigen::MatrixXd y(d, d);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) y(meta.asset_order[a], meta.asset_order[b]) = permuted(a, b);
    }
    return y;
}

CovMatrix from_components(const Eigen::VectorXd& x, const TransformMeta& meta) {
    return CovMatrix(from_components_raw(x, meta));
}

ComponentSeries step_s1(const std::vector<CovMatrix>& series, const TransformMeta& meta) {
    ComponentSeries out{Eigen::MatrixXd(static_cast<Eigen::Index>(series.size()), component_count(meta.dim)), meta};
    for (std::size_t t = 0; t < series.size(); ++t) {
        out.values.row(static_cast<Eigen::Index>(t)) = to_components(series[t], meta).transpose();
    }
    return out;
}

ComponentSeries step_s1(const std::vector<CovMatrix>& series, const TransformConfig& config, std::uint64_t seed) {
    return step_s1(series, select_transform(series, config, seed));
}

bool FittedModel::deterministic() const {
    return std::all_of(margins.begin(), margins.end(), [](const MarginModel& m) { return m.deterministic(); });
}

FittedModel step_s2_fit(const ComponentSeries& components, const MarginLadder& margins,
                        const DependenceSpec& dependence, int first_row, int jobs) {
    const auto& values = components.values;
    const int k = static_cast<int>(values.cols());
    const auto classes = component_classes(components.meta);
    if (static_cast<int>(classes.size()) != k) throw Error(ErrorCode::InvalidArgument, "component count mismatch");

    std::vector<std::optional<MarginModel>> fits(static_cast<std::size_t>(k));
    parallel_for(fits.size(), jobs, [&](std::size_t c) {
        const Eigen::VectorXd column = values.col(static_cast<Eigen::Index>(c));
        fits[c] = MarginModel::fit(margins[classes[c]], column, first_row);
    });

    FittedModel fitted{components.meta, {}, RVineCopula::independence(k), 0, {}};
    for (int c = 0; c < k; ++c) {
        fitted.copula_first_row = std::max(fitted.copula_first_row, fits[c]->first());
        for (const auto& w : fits[c]->warnings()) fitted.warnings.push_back("component " + std::to_string(c) + ": " + w);
        fitted.margins.push_back(std::move(*fits[c]));
    }

    const int rows = static_cast<int>(values.rows()) - fitted.copula_first_row;
    if (dependence.mode == DependenceMode::Independence) return fitted;
    if (rows < 2) throw Error(ErrorCode::DegenerateSample, "too few rows for the copula fit");
    Eigen::MatrixXd u(rows, k);
    for (int c = 0; c < k; ++c) {
        const auto& m = fitted.margins[c];
        const int offset = fitted.copula_first_row - m.first();
        u.col(c) = m.pit(Eigen::VectorXd(m.residuals().segment(offset, rows)));
    }
    DependenceSpec spec = dependence;
    if (spec.mode == DependenceMode::Structured && spec.dependent_subset.empty()) {
        spec.dependent_subset = default_dependent_subset(components.meta);
    }
    fitted.copula = rvine_fit(u, spec, RVineFitOptions{jobs});
    return fitted;
}

std::vector<std::vector<OneStep>> forecast_moments(const FittedModel& fitted, const Eigen::MatrixXd& history,
                                                   int from, int to) {
    const int k = static_cast<int>(fitted.margins.size());
    std::vector<std::vector<OneStep>> by_day(static_cast<std::size_t>(std::max(to - from, 0)),
                                             std::vector<OneStep>(static_cast<std::size_t>(k)));
    for (int c = 0; c < k; ++c) {
        const Eigen::VectorXd column = history.col(c);
        const auto path = fitted.margins[c].one_step_path(column, from, to);
        for (std::size_t t = 0; t < path.size(); ++t) by_day[t][c] = path[t];
    }
    return by_day;
}

CovMatrix step_s3_forecast(const FittedModel& fitted, const std::vector<OneStep>& moments, int n_replications,
                           std::uint64_t seed) {
    const int k = static_cast<int>(fitted.margins.size());
    if (static_cast<int>(moments.size()) != k) throw Error(ErrorCode::InvalidArgument, "moment vector size mismatch");
    if (n_replications < 1) throw Error(ErrorCode::InvalidArgument, "n_replications must be at least 1");
    Eigen::VectorXd x(k);
    if (fitted.deterministic()) {
        for (int c = 0; c < k; ++c) x(c) = fitted.margins[c].draw(moments[c], 0.5);
        return from_components(x, fitted.meta);
    }
    const int d = fitted.meta.dim;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n_replications; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const Eigen::VectorXd u = fitted.copula.simulate_one(rng);
        for (int c = 0; c < k; ++c) x(c) = fitted.margins[c].draw(moments[c], u(c));
        sum += from_components_raw(x, fitted.meta);
    }
    return CovMatrix(sum / static_cast<double>(n_replications));
}

ForecastRecord step_s3_forecast(const FittedModel& fitted, const ComponentSeries& components, int n_replications,
                                std::uint64_t seed) {
    const int rows = static_cast<int>(components.values.rows());
    const auto moments = forecast_moments(fitted, components.values, rows, rows + 1);
    return ForecastRecord{rows + 1,
                          step_s3_forecast(fitted, moments.front(), n_replications, seed),
                          seed,
                          0,
                          std::make_shared<const TransformMeta>(fitted.meta),
                          {}};
}

Eigen::VectorXd bias_factors(const std::vector<Eigen::VectorXd>& observed_vol,
                             const std::vector<Eigen::VectorXd>& predicted_vol, int s_days) {
    if (s_days < 1 || observed_vol.size() != predicted_vol.size() ||
        static_cast<int>(observed_vol.size()) < s_days) {
        throw Error(ErrorCode::InvalidArgument, "bias correction needs s_days aligned volatility pairs");
    }
    const std::size_t n = observed_vol.size();
    Eigen::VectorXd factor = Eigen::VectorXd::Zero(observed_vol.back().size());
    for (std::size_t t = n - static_cast<std::size_t>(s_days); t < n; ++t) {
        factor += (observed_vol[t].array() / predicted_vol[t].array()).matrix();
    }
    return factor / static_cast<double>(s_days);
}

ForecastRecord bias_correct(const ForecastRecord& record, const Eigen::VectorXd& factors) {
    const auto [variances, r] = split_cov(record.predicted);
    const Eigen::VectorXd scaled = variances.values().array() * factors.array().square();
    ForecastRecord out = record;
    out.predicted = assemble_cov(VarianceVector(scaled), r);
    out.predicted.set_day(record.predicted.day());
    out.bias_factors = factors;
    return out;
}

ForecastRecord bias_correct(const ForecastRecord& record, const std::vector<Eigen::VectorXd>& observed_vol,
                            const std::vector<Eigen::VectorXd>& predicted_vol, int s_days) {
    return bias_correct(record, bias_factors(observed_vol, predicted_vol, s_days));
}

std::vector<ForecastRecord> bias_correct_series(const std::vector<ForecastRecord>& records,
                                                const std::vector<CovMatrix>& series, int s_days) {
    std::vector<Eigen::VectorXd> observed;
    std::vector<Eigen::VectorXd> predicted;
    for (const auto& rec : records) {
        if (rec.day < 1 || rec.day > static_cast<long>(series.size())) {
            throw Error(ErrorCode::InvalidArgument, "forecast day outside the observed series");
        }
        observed.push_back(series[rec.day - 1].values().diagonal().array().sqrt());
        predicted.push_back(rec.predicted.values().diagonal().array().sqrt());
    }
    std::vector<ForecastRecord> out;
    for (std::size_t k = static_cast<std::size_t>(s_days); k < records.size(); ++k) {
        const std::vector<Eigen::VectorXd> obs(observed.begin() + static_cast<long>(k - s_days),
                                               observed.begin() + static_cast<long>(k));
        const std::vector<Eigen::VectorXd> pred(predicted.begin() + static_cast<long>(k - s_days),
                                                predicted.begin() + static_cast<long>(k));
        out.push_back(bias_correct(records[k], obs, pred, s_days));
    }
    return out;
}

std::vector<Window> plan_windows(int n_days, const WindowConfig& config) {
    config.validate();
    std::vector<Window> windows;
    for (int w = 0;; ++w) {
        Window win;
        win.index = w;
        win.data_begin = w * config.test_days;
        win.fit_begin = win.data_begin + config.warmup_days;
        win.forecast_begin = win.fit_begin + config.train_days;
        if (win.forecast_begin >= n_days) break;
        win.forecast_end = std::min(win.forecast_begin + config.test_days, n_days);
        windows.push_back(win);
    }
    return windows;
}

std::uint64_t window_seed(std::uint64_t root, const Window& window) {
    return derive_seed(root, static_cast<std::uint64_t>(window.forecast_begin + 1));
}

BacktestResult run_backtest(const std::vector<CovMatrix>& series, const PipelineConfig& config,
                            const WindowConfig& windows, int first_window, int last_window) {
    config.validate();
    const auto plan = plan_windows(static_cast<int>(series.size()), windows);
    const int n_windows = static_cast<int>(plan.size());
    if (last_window < 0 || last_window > n_windows) last_window = n_windows;
    if (first_window < 0 || first_window > last_window) throw Error(ErrorCode::InvalidArgument, "bad window range");

    BacktestResult result;
    for (int w = first_window; w < last_window; ++w) {
        const Window& win = plan[w];
        WindowReport report{win, window_seed(config.root_seed, win), nullptr, std::nullopt, {}};

        const std::vector<CovMatrix> training(series.begin() + win.fit_begin, series.begin() + win.forecast_begin);
        auto meta = std::make_shared<const TransformMeta>(select_transform(training, config.transform, report.seed));
        report.transform = meta;

        // Rows up to the day before the last target; later rows are never seen.
        const std::vector<CovMatrix> history(series.begin() + win.data_begin, series.begin() + win.forecast_end - 1);
        const ComponentSeries components = step_s1(history, *meta);
        const int fit_rows = win.forecast_begin - win.data_begin;
        const ComponentSeries train_part{components.values.topRows(fit_rows), *meta};
        const FittedModel fitted =
            step_s2_fit(train_part, config.margins, config.dependence, windows.warmup_days, config.jobs);
        report.copula = fitted.copula;
        report.warnings = fitted.warnings;

        const auto moments = forecast_moments(fitted, components.values, fit_rows, fit_rows + win.days());
        std::vector<std::optional<CovMatrix>> predicted(static_cast<std::size_t>(win.days()));
        std::vector<std::uint64_t> seeds(predicted.size());
        parallel_for(predicted.size(), config.jobs, [&](std::size_t k) {
            const long day = win.forecast_begin + static_cast<long>(k) + 1;
            seeds[k] = derive_seed(report.seed, static_cast<std::uint64_t>(day));
            predicted[k] = step_s3_forecast(fitted, moments[k], config.n_replications, seeds[k]);
            predicted[k]->set_day(day);
        });
        for (std::size_t k = 0; k < predicted.size(); ++k) {
            result.records.push_back(ForecastRecord{win.forecast_begin + static_cast<long>(k) + 1,
                                                    std::move(*predicted[k]), seeds[k], w, meta, {}});
        }
        result.windows.push_back(std::move(report));
    }
    if (config.bias.enabled) result.records = bias_correct_series(result.records, series, config.bias.s_days);
    return result;
}

CovMatrix naive_forecast(const std::vector<CovMatrix>& series, int train_begin, int train_end, int target,
                         const NaiveSpec& spec) {
    if (train_begin < 0 || train_end <= train_begin || target < train_end || target > static_cast<int>(series.size())) {
        throw Error(ErrorCode::InvalidArgument, "bad naive forecast range");
    }
    switch (spec.kind) {
        case NaiveKind::PreviousDay: return CovMatrix(series[target - 1].values());
        case NaiveKind::TrainMean: {
            Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(series[train_begin].dim(), series[train_begin].dim());
            for (int t = train_begin; t < train_end; ++t) sum += series[t].values();
            return CovMatrix(sum / static_cast<double>(train_end - train_begin));
        }
        case NaiveKind::RiskMetrics: {
            if (!(spec.lambda >= 0.0 && spec.lambda < 1.0)) {
                throw Error(ErrorCode::InvalidArgument, "smoothing parameter must lie in [0, 1)");
            }
            Eigen::MatrixXd smooth = series[train_begin].values();
            for (int t = train_begin; t < target; ++t) {
                smooth = spec.lambda * smooth + (1.0 - spec.lambda) * series[t].values();
            }
            return CovMatrix(smooth);
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown naive forecast kind");
}

std::vector<ForecastRecord> naive_backtest(const std::vector<CovMatrix>& series, const NaiveSpec& spec,
                                           const WindowConfig& windows) {
    std::vector<ForecastRecord> records;
    for (const auto& win : plan_windows(static_cast<int>(series.size()), windows)) {
        for (int t = win.forecast_begin; t < win.forecast_end; ++t) {
            CovMatrix y = naive_forecast(series, win.fit_begin, win.forecast_begin, t, spec);
            y.set_day(t + 1);
            records.push_back(ForecastRecord{t + 1, std::move(y), 0, win.index, nullptr, {}});
        }
    }
    return records;
}

}  // namespace vinecast
