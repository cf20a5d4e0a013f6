#include "vinecast/margins.hpp"

#include "vinecast/error.hpp"
#include "vinecast/optimize.hpp"

#include <boost/math/distributions/normal.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <regex>

namespace vinecast {

// ---------------------------------------------------------------- spec

MarginSpec MarginSpec::parse(const std::string& text) {
    static const std::regex grammar(R"(^\s*(mean|har|arfima)(?:\((\d+),(\d+)\))?(?:\+garch\((normal|sged)\))?\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, grammar)) {
        throw Error(ErrorCode::ConfigError, "unknown margin spec '" + text + "'");
    }
    MarginSpec spec;
    const std::string base = m[1];
    spec.base = base == "mean" ? MarginBase::Mean : (base == "har" ? MarginBase::Har : MarginBase::Arfima);
    if (m[2].matched) {
        if (spec.base != MarginBase::Arfima) throw Error(ErrorCode::ConfigError, "orders only apply to arfima");
        spec.ar_order = std::stoi(m[2]);
        spec.ma_order = std::stoi(m[3]);
        if (spec.ar_order > 5 || spec.ma_order > 5) throw Error(ErrorCode::ConfigError, "arfima orders above 5");
    }
    if (m[4].matched) {
        if (spec.base == MarginBase::Mean) throw Error(ErrorCode::ConfigError, "mean margins take no GARCH part");
        spec.garch = true;
        spec.innovations = m[4] == "sged" ? Innovations::Sged : Innovations::Normal;
    }
    return spec;
}

std::string MarginSpec::to_string() const {
    std::string out = base == MarginBase::Mean ? "mean" : (base == MarginBase::Har ? "har" : "arfima");
    if (base == MarginBase::Arfima && (ar_order != 1 || ma_order != 1)) {
        out += "(" + std::to_string(ar_order) + "," + std::to_string(ma_order) + ")";
    }
    if (garch) out += innovations == Innovations::Sged ? "+garch(sged)" : "+garch(normal)";
    return out;
}

// ---------------------------------------------------------------- mean

MeanFit mean_fit(const Eigen::VectorXd& series) {
    if (series.size() < 2) throw Error(ErrorCode::InvalidArgument, "mean model needs at least two observations");
    MeanFit fit;
    fit.mean = series.mean();
    fit.sd = std::sqrt((series.array() - fit.mean).square().sum() / static_cast<double>(series.size() - 1));
    return fit;
}

double mean_forecast(const MeanFit& fit) { return fit.mean; }

// ---------------------------------------------------------------- HAR

namespace {

Eigen::Vector4d har_regressors(const Eigen::VectorXd& series, Eigen::Index t) {
    Eigen::Vector4d x;
    x << 1.0, series(t - 1), series.segment(t - kHarWeek, kHarWeek).mean(),
        series.segment(t - kHarMonth, kHarMonth).mean();
    return x;
}

}  // namespace

HarFit har_fit(const Eigen::VectorXd& series, int first_target) {
    if (first_target < kHarMonth) throw Error(ErrorCode::InvalidArgument, "HAR needs 22 warm-up observations");
    const Eigen::Index n = series.size() - first_target;
    if (n < 10) throw Error(ErrorCode::InvalidArgument, "HAR needs at least 10 fitted observations");
    Eigen::MatrixXd x(n, 4);
    Eigen::VectorXd y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        x.row(k) = har_regressors(series, first_target + k).transpose();
        y(k) = series(first_target + k);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < 4) throw Error(ErrorCode::RankDeficientDesign, "HAR design matrix is rank deficient");
    HarFit fit;
    fit.coef = qr.solve(y);
    const Eigen::VectorXd resid = y - x * fit.coef;
    fit.residual_sd = std::sqrt(resid.squaredNorm() / static_cast<double>(n - 4));
    return fit;
}

double har_forecast(const HarFit& fit, const Eigen::VectorXd& history) {
    if (history.size() < kHarMonth) throw Error(ErrorCode::InvalidArgument, "HAR forecast needs 22 observations");
    return fit.coef.dot(har_regressors(history, history.size()));
}

// ---------------------------------------------------------------- ARFIMA

Eigen::VectorXd frac_diff_weights(double d, int k_max) {
    Eigen::VectorXd pi(k_max + 1);
    pi(0) = 1.0;
    for (int k = 1; k <= k_max; ++k) pi(k) = pi(k - 1) * (static_cast<double>(k) - 1.0 - d) / static_cast<double>(k);
    return pi;
}

Eigen::VectorXd frac_diff(const Eigen::VectorXd& series, double d, int truncation) {
    const auto n = static_cast<int>(series.size());
    const int k_max = truncation < 0 ? std::max(n - 1, 0) : std::min(truncation, std::max(n - 1, 0));
    const Eigen::VectorXd pi = frac_diff_weights(d, k_max);
    Eigen::VectorXd out(n);
    for (int t = 0; t < n; ++t) {
        double s = 0.0;
        for (int k = 0; k <= std::min(t, k_max); ++k) s += pi(k) * series(t - k);
        out(t) = s;
    }
    return out;
}

namespace {

constexpr double kDLower = 0.001;
constexpr double kDUpper = 0.499;
constexpr double kCoefBound = 0.999;
constexpr int kFftThreshold = 512;

// Full-history fractional difference; FFT convolution for long inputs.
Eigen::VectorXd frac_diff_full(const Eigen::VectorXd& x, double d) {
    const auto n = static_cast<int>(x.size());
    if (n <= kFftThreshold) return frac_diff(x, d);
    int m = 1;
    while (m < 2 * n) m <<= 1;
    std::vector<double> a(static_cast<std::size_t>(m), 0.0);
    std::vector<double> b(static_cast<std::size_t>(m), 0.0);
    const Eigen::VectorXd pi = frac_diff_weights(d, n - 1);
    for (int k = 0; k < n; ++k) {
        a[k] = x(k);
        b[k] = pi(k);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> fa;
    std::vector<std::complex<double>> fb;
    fft.fwd(fa, a);
    fft.fwd(fb, b);
    for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
    std::vector<double> c;
    fft.inv(c, fa);
    Eigen::VectorXd out(n);
    for (int k = 0; k < n; ++k) out(k) = c[k];
    return out;
}

bool ar_stationary(const Eigen::VectorXd& ar) {
    const auto p = ar.size();
    if (p == 0) return true;
    if (p == 1) return std::abs(ar(0)) < 1.0;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    companion.row(0) = ar.transpose();
    companion.bottomLeftCorner(p - 1, p - 1).setIdentity();
    return companion.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
}

// ARMA filter on the differenced series: e_t = w_t - sum ar_i w_{t-i} - sum ma_j e_{t-j}.
Eigen::VectorXd arma_residuals(const Eigen::VectorXd& w, const Eigen::VectorXd& ar, const Eigen::VectorXd& ma) {
    const auto n = w.size();
    Eigen::VectorXd e(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        double s = w(t);
        for (Eigen::Index i = 0; i < ar.size() && i < t; ++i) s -= ar(i) * w(t - 1 - i);
        for (Eigen::Index j = 0; j < ma.size() && j < t; ++j) s -= ma(j) * e(t - 1 - j);
        e(t) = s;
    }
    return e;
}

struct ArfimaParams {
    double mu;
    double d;
    Eigen::VectorXd ar;
    Eigen::VectorXd ma;
};

ArfimaParams unpack(const Eigen::VectorXd& v, int p, int q) {
    return {v(0), v(1), v.segment(2, p), v.segment(2 + p, q)};
}

}  // namespace

Eigen::VectorXd arfima_residuals(const ArfimaFit& fit, const Eigen::VectorXd& series) {
    const Eigen::VectorXd w = frac_diff_full(series.array() - fit.mu, fit.d);
    return arma_residuals(w, fit.ar, fit.ma);
}

ArfimaFit arfima_fit(const Eigen::VectorXd& series, int p, int q) {
    if (p < 0 || q < 0) throw Error(ErrorCode::InvalidArgument, "negative ARFIMA order");
    const auto n = series.size();
    if (n < 20 + p + q) throw Error(ErrorCode::InvalidArgument, "series too short for ARFIMA");
    const double mean = series.mean();
    const double sd = std::sqrt((series.array() - mean).square().mean());
    if (!(sd > 0.0)) throw Error(ErrorCode::DegenerateSample, "constant series");

    auto objective = [&](const Eigen::VectorXd& v) {
        const auto prm = unpack(v, p, q);
        if (!ar_stationary(prm.ar)) return std::numeric_limits<double>::infinity();
        const Eigen::VectorXd w = frac_diff_full(series.array() - prm.mu, prm.d);
        const double sse = arma_residuals(w, prm.ar, prm.ma).squaredNorm();
        return 0.5 * static_cast<double>(n) * std::log(sse / static_cast<double>(n));
    };

    const int k = 2 + p + q;
    Eigen::VectorXd lower(k);
    Eigen::VectorXd upper(k);
    lower << mean - 10.0 * sd, kDLower, Eigen::VectorXd::Constant(p + q, -kCoefBound);
    upper << mean + 10.0 * sd, kDUpper, Eigen::VectorXd::Constant(p + q, kCoefBound);
    std::vector<Eigen::VectorXd> starts;
    const double d_starts[] = {0.1, 0.25, 0.4};
    const double ar_starts[] = {0.2, 0.0, -0.2};
    const double ma_starts[] = {0.0, 0.1, 0.2};
    for (int s = 0; s < 3; ++s) {
        Eigen::VectorXd v(k);
        v(0) = mean;
        v(1) = d_starts[s];
        for (int i = 0; i < p; ++i) v(2 + i) = ar_starts[s] / (1.0 + i);
        for (int j = 0; j < q; ++j) v(2 + p + j) = ma_starts[s] / (1.0 + j);
        starts.push_back(v);
    }
    const OptimResult best = minimize_multistart(objective, starts, lower, upper);

    const auto prm = unpack(best.x, p, q);
    ArfimaFit fit{prm.mu, prm.d, prm.ar, prm.ma, 0.0, false};
    fit.residual_sd = std::sqrt(arfima_residuals(fit, series).squaredNorm() / static_cast<double>(n));
    fit.boundary_d = prm.d < kDLower + 1e-3 || prm.d > kDUpper - 1e-3;
    return fit;
}

namespace {

// Conditional means of rows [0, rows) of x = series - mu (rows may exceed the
// data by one); returns (means, residuals on the observed rows).
std::pair<Eigen::VectorXd, Eigen::VectorXd> arfima_path(const ArfimaFit& fit, const Eigen::VectorXd& series,
                                                        Eigen::Index rows) {
    const Eigen::Index observed = std::min<Eigen::Index>(rows, series.size());
    const Eigen::VectorXd x = series.head(observed).array() - fit.mu;
    const Eigen::VectorXd pi = frac_diff_weights(fit.d, static_cast<int>(std::max<Eigen::Index>(rows - 1, 0)));
    Eigen::VectorXd w(rows);
    Eigen::VectorXd e(observed);
    Eigen::VectorXd means(rows);
    for (Eigen::Index t = 0; t < rows; ++t) {
        // Everything in w_t except the current observation.
        double lagged = 0.0;
        for (Eigen::Index k = 1; k <= t; ++k) lagged += pi(k) * x(t - k);
        double predicted = 0.0;
        for (Eigen::Index i = 0; i < fit.ar.size() && i < t; ++i) predicted += fit.ar(i) * w(t - 1 - i);
        for (Eigen::Index j = 0; j < fit.ma.size() && j < t; ++j) predicted += fit.ma(j) * e(t - 1 - j);
        means(t) = fit.mu + predicted - lagged;
        if (t < observed) {
            w(t) = x(t) + lagged;
            e(t) = w(t) - predicted;
        }
    }
    return {means, e};
}

}  // namespace

double arfima_forecast(const ArfimaFit& fit, const Eigen::VectorXd& history) {
    return arfima_path(fit, history, history.size() + 1).first(history.size());
}

// ---------------------------------------------------------------- GARCH

Eigen::VectorXd garch_variances(const GarchFit& fit, const Eigen::VectorXd& residuals) {
    const auto n = residuals.size();
    Eigen::VectorXd h2(n + 1);
    h2(0) = fit.initial_variance;
    for (Eigen::Index t = 0; t < n; ++t) h2(t + 1) = fit.omega + fit.alpha * residuals(t) * residuals(t) + fit.beta * h2(t);
    return h2;
}

namespace {

struct SgedKernel {
    double shift;  // x + delta for the standardized law
    double log_c;
    double theta;
    double nu;
    double xi;

    SgedKernel(double nu_, double xi_) : nu(nu_), xi(xi_) {
        const auto k = sged_constants(nu_, xi_);
        shift = k.delta;
        log_c = std::log(k.c);
        theta = k.theta;
    }

    [[nodiscard]] double log_pdf(double x) const {
        const double z = x + shift;
        const double scale = (z > 0.0 ? 1.0 - xi : (z < 0.0 ? 1.0 + xi : 1.0)) * theta;
        return log_c - std::pow(std::abs(z) / scale, nu);
    }
};

constexpr double kNuLower = 0.5;
constexpr double kNuUpper = 20.0;
constexpr double kXiBound = 0.95;

}  // namespace

GarchFit garch_fit(const Eigen::VectorXd& residuals, Innovations innovations) {
    const auto n = residuals.size();
    if (n < 30) throw Error(ErrorCode::InvalidArgument, "GARCH needs at least 30 residuals");
    const double mean = residuals.mean();
    const double variance = (residuals.array() - mean).square().mean();
    if (!(variance > 0.0)) throw Error(ErrorCode::DegenerateSample, "constant residuals");
    const bool sged = innovations == Innovations::Sged;
    const Eigen::VectorXd sq = residuals.array().square();

    // Parameters: omega, persistence alpha + beta, share alpha / (alpha + beta) [, nu, xi].
    auto to_fit = [&](const Eigen::VectorXd& v) {
        GarchFit f;
        f.omega = v(0);
        f.alpha = v(1) * v(2);
        f.beta = v(1) * (1.0 - v(2));
        f.initial_variance = variance;
        return f;
    };
    auto objective = [&](const Eigen::VectorXd& v) {
        const GarchFit f = to_fit(v);
        std::optional<SgedKernel> kernel;
        if (sged) kernel.emplace(v(3), v(4));
        double nll = 0.0;
        double h2 = f.initial_variance;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (!(h2 > 0.0)) return std::numeric_limits<double>::infinity();
            if (kernel) {
                nll -= kernel->log_pdf(residuals(t) / std::sqrt(h2)) - 0.5 * std::log(h2);
            } else {
                nll += 0.5 * (std::log(2.0 * std::numbers::pi) + std::log(h2) + sq(t) / h2);
            }
            h2 = f.omega + f.alpha * sq(t) + f.beta * h2;
        }
        return nll;
    };

    const int k = sged ? 5 : 3;
    Eigen::VectorXd lower(k);
    Eigen::VectorXd upper(k);
    lower.head(3) << 0.0, 0.0, 0.0;
    upper.head(3) << std::numeric_limits<double>::infinity(), 1.0, 1.0;
    if (sged) {
        lower.tail(2) << kNuLower, -kXiBound;
        upper.tail(2) << kNuUpper, kXiBound;
    }
    const double persistence[] = {0.9, 0.7, 0.2};
    const double share[] = {0.1, 0.3, 0.5};
    const double nu_start[] = {2.0, 1.5, 4.0};
    std::vector<Eigen::VectorXd> starts;
    for (int s = 0; s < 3; ++s) {
        Eigen::VectorXd v(k);
        v.head(3) << variance * (1.0 - persistence[s]), persistence[s], share[s];
        if (sged) v.tail(2) << nu_start[s], 0.0;
        starts.push_back(v);
    }
    const OptimResult best = minimize_multistart(objective, starts, lower, upper);
    GarchFit fit = to_fit(best.x);
    if (!(fit.alpha + fit.beta < 1.0 - 1e-6)) {
        throw Error(ErrorCode::NonStationary, "GARCH persistence reached 1");
    }
    if (sged) fit.sged = SgedParams::standardized(best.x(3), best.x(4));
    return fit;
}

// ---------------------------------------------------------------- model

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double u) { return boost::math::quantile(boost::math::normal_distribution<double>(), u); }

double clip(double u) { return std::clamp(u, kPitClip, 1.0 - kPitClip); }

}  // namespace

MarginModel MarginModel::fit(const MarginSpec& spec, const Eigen::VectorXd& series, int first) {
    if (first < 0 || first >= series.size()) throw Error(ErrorCode::InvalidArgument, "fit range is empty");
    MarginModel m;
    m.spec_ = spec;
    m.first_ = first;
    const Eigen::VectorXd sample = series.tail(series.size() - first);

    if (spec.base == MarginBase::Har) {
        try {
            m.first_ = std::max(first, kHarMonth);
            m.har_ = har_fit(series, m.first_);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::RankDeficientDesign) throw;
            m.warnings_.push_back("HAR design rank deficient; using the mean model");
            m.spec_ = MarginSpec{};
            m.first_ = first;
        }
    } else if (spec.base == MarginBase::Arfima) {
        m.arfima_ = arfima_fit(sample, spec.ar_order, spec.ma_order);
        if (m.arfima_->boundary_d) m.warnings_.push_back("ARFIMA d estimate at its bound");
    }
    if (m.spec_.base == MarginBase::Mean) m.mean_ = mean_fit(sample);

    // Raw residuals on the fitted rows.
    first = m.first_;
    const int n_rows = static_cast<int>(series.size());
    const auto plain = m.one_step_path(series, first, n_rows);
    Eigen::VectorXd raw(n_rows - first);
    Eigen::VectorXd scale(n_rows - first);
    for (int t = first; t < n_rows; ++t) {
        raw(t - first) = series(t) - plain[t - first].mean;
        scale(t - first) = plain[t - first].scale;
    }
    if (m.spec_.garch) {
        try {
            m.garch_ = garch_fit(raw, m.spec_.innovations);
            const Eigen::VectorXd h2 = garch_variances(*m.garch_, raw);
            scale = h2.head(raw.size()).array().sqrt();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NonStationary && e.code() != ErrorCode::OptimizerDiverged) throw;
            m.warnings_.push_back(std::string("GARCH fit failed (") + e.what() + "); using constant scale");
            m.spec_.garch = false;
            m.spec_.innovations = Innovations::Normal;
        }
    }
    m.residuals_ = raw.array() / scale.array();
    m.residual_mean_ = m.residuals_.mean();
    const double var = (m.residuals_.array() - m.residual_mean_).square().sum() /
                       static_cast<double>(std::max<Eigen::Index>(m.residuals_.size() - 1, 1));
    m.residual_sd_ = var > 0.0 ? std::sqrt(var) : 1.0;
    return m;
}

std::vector<OneStep> MarginModel::one_step_path(const Eigen::VectorXd& series, int from, int to) const {
    if (from < first_ || to < from || to > series.size() + 1) throw Error(ErrorCode::InvalidArgument, "bad path range");
    const int rows = to - first_;
    Eigen::VectorXd means(rows);
    double plain_scale = 1.0;
    switch (spec_.base) {
        case MarginBase::Mean:
            means.setConstant(mean_->mean);
            plain_scale = mean_->sd;
            break;
        case MarginBase::Har: {
            for (int t = first_; t < to; ++t) means(t - first_) = har_forecast(*har_, series.head(t));
            plain_scale = har_->residual_sd;
            break;
        }
        case MarginBase::Arfima: {
            const Eigen::VectorXd tail = series.tail(series.size() - first_);
            means = arfima_path(*arfima_, tail, rows).first;
            plain_scale = arfima_->residual_sd;
            break;
        }
    }
    Eigen::VectorXd scales = Eigen::VectorXd::Constant(rows, plain_scale);
    if (garch_) {
        const int observed = std::min<int>(rows, static_cast<int>(series.size()) - first_);
        Eigen::VectorXd raw(observed);
        for (int k = 0; k < observed; ++k) raw(k) = series(first_ + k) - means(k);
        const Eigen::VectorXd h2 = garch_variances(*garch_, raw);
        scales = h2.head(rows).array().sqrt();
    }
    std::vector<OneStep> out;
    for (int t = from; t < to; ++t) out.push_back({means(t - first_), scales(t - first_)});
    return out;
}

double MarginModel::pit(double residual) const {
    if (garch_ && garch_->sged) return clip(sged_cdf_closed(residual, *garch_->sged));
    return clip(normal_cdf((residual - residual_mean_) / residual_sd_));
}

Eigen::VectorXd MarginModel::pit(const Eigen::VectorXd& residuals) const {
    Eigen::VectorXd u(residuals.size());
    for (Eigen::Index k = 0; k < residuals.size(); ++k) u(k) = pit(residuals(k));
    return u;
}

double MarginModel::inverse_pit(double u) const {
    u = clip(u);
    if (garch_ && garch_->sged) return sged_quantile_closed(u, *garch_->sged);
    return residual_mean_ + residual_sd_ * normal_quantile(u);
}

double MarginModel::draw(const OneStep& step, double u) const {
    if (spec_.base == MarginBase::Mean) return step.mean;
    return step.mean + step.scale * inverse_pit(u);
}

}  // namespace vinecast
