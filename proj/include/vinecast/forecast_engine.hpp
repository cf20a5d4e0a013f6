#pragma once

#include "vinecast/margins.hpp"
#include "vinecast/matrix_core.hpp"
#include "vinecast/rvine_copula.hpp"
#include "vinecast/structure_select.hpp"
#include "vinecast/vine_structure.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vinecast {

enum class TransformKind { Pcv, Cholesky };
enum class SelectionKind { Mst, CvineMin, Random, Fixed };

struct SelectionConfig {
    SelectionKind kind = SelectionKind::Mst;
    AveragingScheme scheme;
    PartialWeightSource source = PartialWeightSource::FromAverage;
    std::uint64_t seed = 0;                  ///< random selection only
    std::optional<RVineStructure> fixed;     ///< fixed selection only
};

struct TransformConfig {
    TransformKind kind = TransformKind::Pcv;
    SelectionConfig selection;
    std::vector<int> asset_order;  ///< Cholesky only; empty = input order
};

/// Margin classes of the parsimony ladder. For the Cholesky path every
/// component belongs to Variance.
enum class ComponentClass { Variance, Tree1, Tree2To3, Tree4Plus };

struct MarginLadder {
    MarginSpec variances;
    MarginSpec tree1;
    MarginSpec tree2_3;
    MarginSpec tree4_plus;

    [[nodiscard]] static MarginLadder uniform(const MarginSpec& spec) { return {spec, spec, spec, spec}; }
    [[nodiscard]] const MarginSpec& operator[](ComponentClass c) const;
};

struct BiasCorrection {
    bool enabled = false;
    int s_days = 264;
};

struct PipelineConfig {
    TransformConfig transform;
    MarginLadder margins;
    DependenceSpec dependence;
    int n_replications = 1000;
    std::uint64_t root_seed = 0;
    BiasCorrection bias;
    int jobs = 1;

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

struct WindowConfig {
    int train_days = 502;
    int test_days = 22;
    int warmup_days = 22;

    void validate() const;
};

/// Everything needed to map one day's matrix to its component vector and back.
struct TransformMeta {
    TransformKind kind = TransformKind::Pcv;
    int dim = 0;
    std::optional<RVineStructure> structure;  ///< pcv only
    std::vector<int> asset_order;             ///< Cholesky only, full permutation
};

[[nodiscard]] int component_count(int dim);
[[nodiscard]] std::vector<ComponentClass> component_classes(const TransformMeta& meta);
/// Components modeled jointly in structured dependence mode: the variances and
/// tree-1 correlations (pcv), or the diagonal and first row (Cholesky).
[[nodiscard]] std::vector<int> default_dependent_subset(const TransformMeta& meta);

/// Picks the data-transform structure from a training sample of matrices.
[[nodiscard]] TransformMeta select_transform(const std::vector<CovMatrix>& training, const TransformConfig& config,
                                             std::uint64_t window_seed);

[[nodiscard]] Eigen::VectorXd to_components(const CovMatrix& y, const TransformMeta& meta);
/// Inverse of to_components. Back-transformed correlations are clamped inside
/// (-1, 1) so any real component vector maps to a PD matrix.
[[nodiscard]] Eigen::MatrixXd from_components_raw(const Eigen::VectorXd& x, const TransformMeta& meta);
[[nodiscard]] CovMatrix from_components(const Eigen::VectorXd& x, const TransformMeta& meta);

struct ComponentSeries {
    Eigen::MatrixXd values;  ///< days x components
    TransformMeta meta;
};

/// Step S1 with a given transform.
[[nodiscard]] ComponentSeries step_s1(const std::vector<CovMatrix>& series, const TransformMeta& meta);
/// Step S1 with the transform selected on `series` itself.
[[nodiscard]] ComponentSeries step_s1(const std::vector<CovMatrix>& series, const TransformConfig& config,
                                      std::uint64_t seed = 0);

struct FittedModel {
    TransformMeta meta;
    std::vector<MarginModel> margins;
    RVineCopula copula;
    int copula_first_row = 0;  ///< first row of the pseudo-observations
    std::vector<std::string> warnings;

    [[nodiscard]] bool deterministic() const;
};

/// Step S2: margins on rows [first_row, end) of `components` (earlier rows
/// only feed lags), then the copula on the PIT residuals.
[[nodiscard]] FittedModel step_s2_fit(const ComponentSeries& components, const MarginLadder& margins,
                                      const DependenceSpec& dependence, int first_row, int jobs = 1);

/// Conditional moments for rows [from, to) of `history`, one vector per day.
[[nodiscard]] std::vector<std::vector<OneStep>> forecast_moments(const FittedModel& fitted,
                                                                 const Eigen::MatrixXd& history, int from, int to);

struct ForecastRecord {
    long day = 0;  ///< 1-based day of the forecast target
    CovMatrix predicted;
    std::uint64_t seed = 0;  ///< replication i draws from derive_seed(seed, i)
    int window = 0;
    std::shared_ptr<const TransformMeta> transform;
    Eigen::VectorXd bias_factors;  ///< empty when uncorrected
};

/// Step S3 for one day: mean of n back-transformed simulated forecasts.
[[nodiscard]] CovMatrix step_s3_forecast(const FittedModel& fitted, const std::vector<OneStep>& moments,
                                         int n_replications, std::uint64_t seed);
/// Step S3 for the day after the fitted sample in `components`.
[[nodiscard]] ForecastRecord step_s3_forecast(const FittedModel& fitted, const ComponentSeries& components,
                                              int n_replications, std::uint64_t seed);

/// Mean over the last s_days of observed / predicted volatility, per asset.
[[nodiscard]] Eigen::VectorXd bias_factors(const std::vector<Eigen::VectorXd>& observed_vol,
                                           const std::vector<Eigen::VectorXd>& predicted_vol, int s_days);
/// Scales predicted volatilities by `factors`, leaving correlations untouched.
[[nodiscard]] ForecastRecord bias_correct(const ForecastRecord& record, const Eigen::VectorXd& factors);
[[nodiscard]] ForecastRecord bias_correct(const ForecastRecord& record,
                                          const std::vector<Eigen::VectorXd>& observed_vol,
                                          const std::vector<Eigen::VectorXd>& predicted_vol, int s_days);
/// Corrects every record that has s_days predecessors; earlier records are dropped.
[[nodiscard]] std::vector<ForecastRecord> bias_correct_series(const std::vector<ForecastRecord>& records,
                                                              const std::vector<CovMatrix>& series, int s_days);

/// Row ranges of one moving window (0-based rows of the input series).
struct Window {
    int index = 0;
    int data_begin = 0;      ///< first warmup row
    int fit_begin = 0;       ///< first training row
    int forecast_begin = 0;  ///< first forecast target row
    int forecast_end = 0;    ///< one past the last target row
    [[nodiscard]] int days() const noexcept { return forecast_end - forecast_begin; }
    [[nodiscard]] bool truncated(const WindowConfig& w) const noexcept { return days() < w.test_days; }
};

[[nodiscard]] std::vector<Window> plan_windows(int n_days, const WindowConfig& config);
/// Seed of a window, keyed by its first 1-based forecast day.
[[nodiscard]] std::uint64_t window_seed(std::uint64_t root, const Window& window);

struct WindowReport {
    Window window;
    std::uint64_t seed = 0;
    std::shared_ptr<const TransformMeta> transform;
    std::optional<RVineCopula> copula;
    std::vector<std::string> warnings;
};

struct BacktestResult {
    std::vector<ForecastRecord> records;
    std::vector<WindowReport> windows;
};

/// Runs windows [first_window, last_window) (-1 = all). Bias correction, when
/// enabled, is applied to the concatenated records afterwards.
[[nodiscard]] BacktestResult run_backtest(const std::vector<CovMatrix>& series, const PipelineConfig& config,
                                          const WindowConfig& windows, int first_window = 0,
                                          int last_window = -1);

enum class NaiveKind { PreviousDay, TrainMean, RiskMetrics };

struct NaiveSpec {
    NaiveKind kind = NaiveKind::PreviousDay;
    double lambda = 0.94;
};

/// Forecast of row `target` from rows before it; training rows are
/// [train_begin, train_end) and seed the smoother.
[[nodiscard]] CovMatrix naive_forecast(const std::vector<CovMatrix>& series, int train_begin, int train_end,
                                       int target, const NaiveSpec& spec);
[[nodiscard]] std::vector<ForecastRecord> naive_backtest(const std::vector<CovMatrix>& series,
                                                         const NaiveSpec& spec, const WindowConfig& windows);

}  // namespace vinecast
