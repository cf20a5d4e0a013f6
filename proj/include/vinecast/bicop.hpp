#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace vinecast {

enum class Family { Independence, Gaussian, Clayton, Gumbel, Frank };

[[nodiscard]] std::string to_string(Family family);
[[nodiscard]] Family family_from_string(const std::string& name);

/// One-parameter bivariate copula. Rotations (0, 90, 180, 270 degrees) apply to
/// Clayton and Gumbel only.
struct PairCopula {
    Family family = Family::Independence;
    int rotation = 0;
    double param = 0.0;

    /// Throws InvalidArgument on an invalid family/rotation/parameter combination.
    void validate() const;
    [[nodiscard]] int parameter_count() const noexcept { return family == Family::Independence ? 0 : 1; }
    friend bool operator==(const PairCopula&, const PairCopula&) = default;
};

/// Clamp applied to h-function outputs so vine propagation never reaches 0 or 1.
inline constexpr double kHClip = 1e-12;

// The first argument is u, the second v. Inputs must lie strictly inside (0, 1).
[[nodiscard]] double bicop_cdf(const PairCopula& pc, double u, double v);
[[nodiscard]] double bicop_pdf(const PairCopula& pc, double u, double v);
/// Conditional distribution of u given v: dC(u, v)/dv.
[[nodiscard]] double bicop_h1(const PairCopula& pc, double u, double v);
/// Conditional distribution of v given u: dC(u, v)/du.
[[nodiscard]] double bicop_h2(const PairCopula& pc, double u, double v);
/// u with bicop_h1(pc, u, v) = w.
[[nodiscard]] double bicop_hinv1(const PairCopula& pc, double w, double v);
/// v with bicop_h2(pc, u, v) = w.
[[nodiscard]] double bicop_hinv2(const PairCopula& pc, double u, double w);

[[nodiscard]] double bicop_loglik(const PairCopula& pc, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Kendall's tau-b in O(n log n).
[[nodiscard]] double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
/// Population Kendall's tau of a pair copula.
[[nodiscard]] double copula_tau(const PairCopula& pc);
/// Parameter of `family` (unrotated) with population tau `tau` > 0.
[[nodiscard]] double param_from_tau(Family family, double tau);

enum class FamilySet { GaussianOnly, Mixed };

struct BicopFitOptions {
    FamilySet families = FamilySet::Mixed;
    bool independence_test = true;
    double test_level = 0.05;
};

/// Independence when the Kendall-tau z-test does not reject; otherwise the
/// AIC-best of the allowed families, each started at its tau inversion and
/// refined by maximum likelihood.
[[nodiscard]] PairCopula bicop_fit(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                                   const BicopFitOptions& options = {});

}  // namespace vinecast
