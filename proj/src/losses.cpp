#include "pmb/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pmb {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ParameterError(std::string(what) + " must be a positive finite number");
}

double huber(double z, double delta) {
    const double a = std::abs(z);
    return a <= delta ? 0.5 * z * z : delta * (a - 0.5 * delta);
}

}  // namespace

AdmissibleLoss make_hinge(double rho) {
    require_positive(rho, "rho");
    AdmissibleLoss l;
    l.kind_ = AdmissibleLoss::Kind::Hinge;
    l.name_ = "hinge";
    l.rho_ = rho;
    l.gamma_ = 1.0 / rho;
    l.phi0_ = 1.0;
    return l;
}

AdmissibleLoss make_squared_hinge(double rho, double radius) {
    require_positive(rho, "rho");
    require_positive(radius, "radius");
    AdmissibleLoss l;
    l.kind_ = AdmissibleLoss::Kind::SquaredHinge;
    l.name_ = "sqhinge";
    l.rho_ = rho;
    l.radius_ = radius;
    l.gamma_ = 2.0 * (rho + radius) / (rho * rho);
    l.phi0_ = 1.0;
    l.domain_ = {-radius, radius};
    return l;
}

AdmissibleLoss make_huber(double delta, double offset, double scale) {
    require_positive(delta, "delta");
    require_positive(scale, "scale");
    if (!std::isfinite(offset)) throw ParameterError("offset must be finite");
    const double at_zero = huber(offset, delta);
    if (!(at_zero > 0.0)) throw ParameterError("huber loss must be strictly positive at 0 (offset != 0)");
    AdmissibleLoss l;
    l.kind_ = AdmissibleLoss::Kind::Huber;
    l.name_ = "huber";
    l.delta_ = delta;
    l.offset_ = offset;
    l.rho_ = scale;
    l.gamma_ = delta / scale;
    l.phi0_ = at_zero;
    return l;
}

AdmissibleLoss AdmissibleLoss::custom(std::string name, double gamma, std::function<double(double)> fn,
                                      Interval domain) {
    AdmissibleLoss l;
    l.kind_ = Kind::Custom;
    l.name_ = std::move(name);
    l.gamma_ = gamma;
    l.fn_ = std::move(fn);
    l.domain_ = domain;
    l.phi0_ = l.fn_(0.0);
    return l;
}

double AdmissibleLoss::eval(double x) const {
    switch (kind_) {
        case Kind::Hinge:
            return std::max(0.0, 1.0 - x / rho_);
        case Kind::SquaredHinge: {
            const double h = std::max(0.0, 1.0 - x / rho_);
            return h * h;
        }
        case Kind::Huber:
            return huber(offset_ - x / rho_, delta_);
        case Kind::Custom:
            return fn_(x);
    }
    return 0.0;
}

double AdmissibleLoss::subgradient(double x) const {
    switch (kind_) {
        case Kind::Hinge:
            return x < rho_ ? -1.0 / rho_ : 0.0;
        case Kind::SquaredHinge:
            return x < rho_ ? -2.0 / rho_ * (1.0 - x / rho_) : 0.0;
        case Kind::Huber: {
            const double z = offset_ - x / rho_;
            const double dh = std::abs(z) <= delta_ ? z : (z > 0 ? delta_ : -delta_);
            return -dh / rho_;
        }
        case Kind::Custom: {
            const double h = 1e-6 * std::max(1.0, std::abs(x));
            return (fn_(x + h) - fn_(x - h)) / (2.0 * h);
        }
    }
    return 0.0;
}

AdmissibilityReport check_admissibility(const AdmissibleLoss& loss, Interval domain, std::size_t grid_size) {
    if (grid_size < 3) throw ParameterError("grid_size must be >= 3");
    if (!domain.bounded() || !(domain.hi > domain.lo)) throw ParameterError("domain must be a finite, non-degenerate interval");

    std::vector<double> xs(grid_size), fs(grid_size);
    const double step = (domain.hi - domain.lo) / static_cast<double>(grid_size - 1);
    for (std::size_t i = 0; i < grid_size; ++i) {
        xs[i] = i + 1 == grid_size ? domain.hi : domain.lo + step * static_cast<double>(i);
        fs[i] = loss.eval(xs[i]);
    }

    AdmissibilityReport rep;

    rep.non_negative.worst = fs[0];
    rep.non_negative.witness = xs[0];
    for (std::size_t i = 0; i < grid_size; ++i) {
        if (fs[i] < rep.non_negative.worst) {
            rep.non_negative.worst = fs[i];
            rep.non_negative.witness = xs[i];
        }
    }
    rep.non_negative.pass = rep.non_negative.worst >= 0.0;

    const double f0 = loss.eval(0.0);
    rep.positive_at_zero.worst = f0;
    rep.positive_at_zero.pass = f0 > 0.0 && approx_equal(f0, loss.phi0());

    // Midpoint convexity on adjacent triples (equally spaced grid).
    rep.convex.worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < grid_size; ++i) {
        const double avg = 0.5 * (fs[i - 1] + fs[i + 1]);
        const double excess = fs[i] - avg;
        if (excess > rep.convex.worst) {
            rep.convex.worst = excess;
            rep.convex.witness = xs[i];
        }
        if (excess > kRelTol * std::abs(avg) + kAbsTol) rep.convex.pass = false;
    }

    // For a function convex on the grid the steepest secant joins adjacent
    // points, so adjacent quotients suffice once convexity has passed.
    rep.lipschitz.worst = 0.0;
    for (std::size_t i = 0; i + 1 < grid_size; ++i) {
        const double q = std::abs(fs[i + 1] - fs[i]) / (xs[i + 1] - xs[i]);
        if (q > rep.lipschitz.worst) {
            rep.lipschitz.worst = q;
            rep.lipschitz.witness = xs[i];
        }
    }
    {
        const double q = std::abs(fs.back() - fs.front()) / (xs.back() - xs.front());
        if (q > rep.lipschitz.worst) {
            rep.lipschitz.worst = q;
            rep.lipschitz.witness = xs.front();
        }
    }
    rep.lipschitz.pass = rep.lipschitz.worst <= loss.gamma() * (1.0 + kRelTol);
    return rep;
}

Interval default_check_domain(const AdmissibleLoss& loss, double radius) {
    const double half = 2.0 * radius + 1.0;
    return Interval{-half, half}.intersect(loss.domain());
}

LossVector LossVector::from_values(std::vector<double> values) {
    LossVector lv;
    double sq = 0.0;
    for (double v : values) {
        lv.l1 += v;
        sq += v * v;
    }
    lv.l2 = std::sqrt(sq);
    lv.values = std::move(values);
    return lv;
}

void require_unit_ball(std::span<const double> u) {
    const double n = norm(u);
    if (!(n <= 1.0 + kUnitBallSlack))
        throw InfeasibleWitness("witness norm " + std::to_string(n) + " exceeds 1");
}

std::vector<double> update_margins(std::span<const double> u, const RunTrace& trace,
                                   std::span<const LabeledExample> stream) {
    require_consistent(trace, stream);
    if (!stream.empty() && u.size() != stream.front().features.size())
        throw InvalidInput("witness dimension does not match the stream");
    std::vector<double> m;
    m.reserve(trace.update_rounds.size());
    for (std::size_t t : trace.update_rounds) m.push_back(stream[t].label * dot(u, stream[t].features));
    return m;
}

LossVector loss_vector(const AdmissibleLoss& loss, std::span<const double> u, const RunTrace& trace,
                       std::span<const LabeledExample> stream) {
    require_unit_ball(u);
    auto margins = update_margins(u, trace, stream);
    for (double& m : margins) m = loss.eval(m);
    return LossVector::from_values(std::move(margins));
}

}  // namespace pmb
