#pragma once

#include "vinecast/sged.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace vinecast {

enum class MarginBase { Mean, Har, Arfima };
enum class Innovations { Normal, Sged };

/// Grammar: mean | har | arfima[(p,q)], optionally followed by
/// +garch(normal) or +garch(sged) for the har and arfima bases.
struct MarginSpec {
    MarginBase base = MarginBase::Mean;
    bool garch = false;
    Innovations innovations = Innovations::Normal;
    int ar_order = 1;
    int ma_order = 1;

    [[nodiscard]] static MarginSpec parse(const std::string& text);
    [[nodiscard]] std::string to_string() const;
    friend bool operator==(const MarginSpec&, const MarginSpec&) = default;
};

struct MeanFit {
    double mean = 0.0;
    double sd = 0.0;
};

struct HarFit {
    Eigen::Vector4d coef = Eigen::Vector4d::Zero();  ///< intercept, daily, weekly, monthly
    double residual_sd = 0.0;
};

struct ArfimaFit {
    double mu = 0.0;
    double d = 0.0;
    Eigen::VectorXd ar;
    Eigen::VectorXd ma;
    double residual_sd = 0.0;
    bool boundary_d = false;  ///< d pinned at a box bound
};

struct GarchFit {
    double omega = 0.0;
    double alpha = 0.0;  ///< weight of the squared residual
    double beta = 0.0;   ///< weight of the lagged variance
    double initial_variance = 0.0;
    std::optional<SgedParams> sged;  ///< standardized innovation law when SGED
};

inline constexpr int kHarWeek = 5;
inline constexpr int kHarMonth = 22;
inline constexpr double kPitClip = 1e-6;

[[nodiscard]] MeanFit mean_fit(const Eigen::VectorXd& series);
[[nodiscard]] double mean_forecast(const MeanFit& fit);

/// OLS of series[t] on (1, series[t-1], 5-day mean, 22-day mean) for targets
/// t in [first_target, size). first_target must be at least 22.
[[nodiscard]] HarFit har_fit(const Eigen::VectorXd& series, int first_target = kHarMonth);
/// `history` holds at least the last 22 observations, newest last.
[[nodiscard]] double har_forecast(const HarFit& fit, const Eigen::VectorXd& history);

/// Binomial weights pi_k of (1 - L)^d for k <= k_max.
[[nodiscard]] Eigen::VectorXd frac_diff_weights(double d, int k_max);
/// (1 - L)^d applied to `series`, truncated at lag `truncation` (-1 = full history).
[[nodiscard]] Eigen::VectorXd frac_diff(const Eigen::VectorXd& series, double d, int truncation = -1);

/// Conditional-sum-of-squares fit with d boxed to (0.001, 0.499).
[[nodiscard]] ArfimaFit arfima_fit(const Eigen::VectorXd& series, int p = 1, int q = 1);
/// One-step forecast given the full `history` (the conditioning sample).
[[nodiscard]] double arfima_forecast(const ArfimaFit& fit, const Eigen::VectorXd& history);
/// CSS residuals of `series` under `fit`.
[[nodiscard]] Eigen::VectorXd arfima_residuals(const ArfimaFit& fit, const Eigen::VectorXd& series);

/// Conditional variances h_t^2 for t = 0..n (the last entry is the one-step
/// forecast); h_0^2 is fit.initial_variance.
[[nodiscard]] Eigen::VectorXd garch_variances(const GarchFit& fit, const Eigen::VectorXd& residuals);
[[nodiscard]] GarchFit garch_fit(const Eigen::VectorXd& residuals, Innovations innovations);

/// Conditional mean and scale of one component on one day.
struct OneStep {
    double mean = 0.0;
    double scale = 0.0;
};

/// A fitted margin for one component series.
class MarginModel {
public:
    /// Fits on rows [first, size) of `series`; earlier rows only feed HAR lags.
    /// A rank-deficient HAR design or a failed GARCH fit falls back to the
    /// simpler model and records a warning.
    [[nodiscard]] static MarginModel fit(const MarginSpec& spec, const Eigen::VectorXd& series, int first);

    [[nodiscard]] const MarginSpec& spec() const noexcept { return spec_; }
    /// First fitted row; residuals()[k] belongs to row first() + k.
    [[nodiscard]] int first() const noexcept { return first_; }
    /// True when draw() ignores its probability argument.
    [[nodiscard]] bool deterministic() const noexcept { return spec_.base == MarginBase::Mean; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    [[nodiscard]] const std::optional<MeanFit>& mean_part() const noexcept { return mean_; }
    [[nodiscard]] const std::optional<HarFit>& har_part() const noexcept { return har_; }
    [[nodiscard]] const std::optional<ArfimaFit>& arfima_part() const noexcept { return arfima_; }
    [[nodiscard]] const std::optional<GarchFit>& garch_part() const noexcept { return garch_; }

    /// Conditional mean/scale for rows [from, to) of `series`, each using only
    /// rows before it (row `to - 1` may lie one past the data end).
    [[nodiscard]] std::vector<OneStep> one_step_path(const Eigen::VectorXd& series, int from, int to) const;

    /// Standardized residuals on the fitted rows.
    [[nodiscard]] const Eigen::VectorXd& residuals() const noexcept { return residuals_; }

    /// Probability integral transform of standardized residuals, clipped.
    [[nodiscard]] double pit(double residual) const;
    [[nodiscard]] Eigen::VectorXd pit(const Eigen::VectorXd& residuals) const;
    /// Standardized innovation with probability level u.
    [[nodiscard]] double inverse_pit(double u) const;

    /// Forecast value for a day with conditional moments `step` and copula draw u.
    /// Mean margins ignore u.
    [[nodiscard]] double draw(const OneStep& step, double u) const;

private:
    MarginSpec spec_;
    int first_ = 0;
    std::optional<MeanFit> mean_;
    std::optional<HarFit> har_;
    std::optional<ArfimaFit> arfima_;
    std::optional<GarchFit> garch_;
    Eigen::VectorXd residuals_;
    double residual_mean_ = 0.0;
    double residual_sd_ = 1.0;
    std::vector<std::string> warnings_;
};

}  // namespace vinecast
