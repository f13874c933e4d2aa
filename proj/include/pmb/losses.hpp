#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pmb/common.hpp"
#include "pmb/perceptron.hpp"

namespace pmb {

/// Closed interval of the real line; infinite endpoints allowed.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
    Interval intersect(const Interval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
};

/// A margin loss phi with the constants the mistake bounds consume.
///
/// `gamma` is a Lipschitz constant of `eval` on `domain`. For losses whose
/// Lipschitz property only holds on a bounded interval (squared hinge) the
/// domain is finite and every margin fed to the loss must lie inside it.
class AdmissibleLoss {
public:
    enum class Kind { Hinge, SquaredHinge, Huber, Custom };

    /// Wraps an arbitrary evaluator. No admissibility is assumed; run
    /// check_admissibility on it.
    static AdmissibleLoss custom(std::string name, double gamma, std::function<double(double)> fn,
                                 Interval domain = {});

    double eval(double margin) const;
    double operator()(double margin) const { return eval(margin); }

    /// An element of the subdifferential at `margin` (0 at hinge kinks).
    double subgradient(double margin) const;

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    double gamma() const noexcept { return gamma_; }
    double phi0() const noexcept { return phi0_; }
    const Interval& domain() const noexcept { return domain_; }

    // hinge / squared hinge margin; huber scale
    double rho() const noexcept { return rho_; }
    // squared hinge: radius bound r
    double radius() const noexcept { return radius_; }
    // huber
    double delta() const noexcept { return delta_; }
    double offset() const noexcept { return offset_; }

    /// Copy with a different Lipschitz constant (used to probe constants that
    /// are claimed but not proven).
    AdmissibleLoss with_gamma(double gamma) const {
        AdmissibleLoss c = *this;
        c.gamma_ = gamma;
        return c;
    }

private:
    friend AdmissibleLoss make_hinge(double);
    friend AdmissibleLoss make_squared_hinge(double, double);
    friend AdmissibleLoss make_huber(double, double, double);

    AdmissibleLoss() = default;

    Kind kind_ = Kind::Custom;
    std::string name_;
    double gamma_ = 0.0;
    double phi0_ = 0.0;
    Interval domain_;
    double rho_ = 1.0;
    double radius_ = 0.0;
    double delta_ = 0.0;
    double offset_ = 0.0;
    std::function<double(double)> fn_;
};

/// max(0, 1 - x/rho); gamma = 1/rho, phi(0) = 1.
AdmissibleLoss make_hinge(double rho);

/// max(0, 1 - x/rho)^2 on the domain [-radius, radius].
///
/// gamma = 2 (rho + radius) / rho^2, the largest |phi'| on that domain
/// (attained at x = -radius). The often-quoted 2 radius / rho^2 is the slope
/// at x = +radius only and is not a Lipschitz constant there.
AdmissibleLoss make_squared_hinge(double rho, double radius);

/// Huber loss of (offset - x/scale):
///   h(z) = z^2 / 2            if |z| <= delta
///        = delta (|z| - delta/2) otherwise.
/// gamma = delta / scale, phi(0) = h(offset), which must be > 0.
AdmissibleLoss make_huber(double delta, double offset = 1.0, double scale = 1.0);

struct ConditionResult {
    bool pass = true;
    double worst = 0.0;     // most violating observed quantity
    double witness = 0.0;   // grid point where `worst` was observed
};

struct AdmissibilityReport {
    ConditionResult non_negative;       // worst = min eval
    ConditionResult positive_at_zero;   // worst = eval(0)
    ConditionResult convex;             // worst = max midpoint excess
    ConditionResult lipschitz;          // worst = max |difference quotient|

    bool all_pass() const {
        return non_negative.pass && positive_at_zero.pass && convex.pass && lipschitz.pass;
    }
};

/// Grid check of the four admissibility conditions on [domain.lo, domain.hi].
/// Requires grid_size >= 3 and a finite, non-degenerate domain.
AdmissibilityReport check_admissibility(const AdmissibleLoss& loss, Interval domain,
                                        std::size_t grid_size = 1001);

/// Default verification interval for a stream radius r: [-2r-1, 2r+1],
/// clipped to the loss's declared domain.
Interval default_check_domain(const AdmissibleLoss& loss, double radius);

struct LossVector {
    std::vector<double> values;
    double l1 = 0.0;
    double l2 = 0.0;

    static LossVector from_values(std::vector<double> values);
};

/// Losses incurred by witness u on the update rounds, in round order.
LossVector loss_vector(const AdmissibleLoss& loss, std::span<const double> u, const RunTrace& trace,
                       std::span<const LabeledExample> stream);

/// Throws InfeasibleWitness if ||u|| > 1 + slack.
void require_unit_ball(std::span<const double> u);

/// y_t (u . x_t) for t in the update rounds.
std::vector<double> update_margins(std::span<const double> u, const RunTrace& trace,
                                   std::span<const LabeledExample> stream);

}  // namespace pmb
