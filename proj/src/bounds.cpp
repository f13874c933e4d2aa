#include "pmb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pmb/random.hpp"

namespace pmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NameEntry {
    BoundName name;
    std::string_view text;
};

constexpr NameEntry kNames[] = {
    {BoundName::Novikoff, "novikoff"},
    {BoundName::L1General, "l1_general"},
    {BoundName::L1GeneralRadius, "l1_general_radius"},
    {BoundName::L1Hinge, "l1_hinge"},
    {BoundName::L1HingeRadius, "l1_hinge_radius"},
    {BoundName::L1SqHinge, "l1_sq_hinge"},
    {BoundName::L1SqHingeRadius, "l1_sq_hinge_radius"},
    {BoundName::L2First, "l2_first"},
    {BoundName::L2Radius, "l2_radius"},
};

void require_rho(double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("rho must be a positive finite number");
}

bool uses_l2(BoundName n) { return n == BoundName::L2First || n == BoundName::L2Radius; }

bool uses_family(BoundName n) { return n == BoundName::L1General || n == BoundName::L1GeneralRadius; }

/// The loss whose per-round values a bound consumes.
AdmissibleLoss loss_for(BoundName name, LossFamily family, double rho, double radius) {
    switch (name) {
        case BoundName::L1General:
        case BoundName::L1GeneralRadius:
            return make_family_loss(family, rho, radius);
        case BoundName::L1SqHinge:
        case BoundName::L1SqHingeRadius:
            return make_family_loss(LossFamily::SquaredHinge, rho, radius);
        default:
            return make_hinge(rho);
    }
}

/// Rejects losses that do not certify themselves on the margins' range.
void require_admissible(const AdmissibleLoss& loss, double radius) {
    const double reach = radius * (1.0 - kUnitBallSlack);
    if (loss.domain().lo > -reach || loss.domain().hi < reach)
        throw PreconditionError("loss '" + loss.name() + "' is only declared on [" +
                                std::to_string(loss.domain().lo) + ", " + std::to_string(loss.domain().hi) +
                                "], margins reach +-" + std::to_string(radius));
    const auto rep = check_admissibility(loss, default_check_domain(loss, radius));
    if (!rep.all_pass()) throw PreconditionError("loss '" + loss.name() + "' failed its admissibility check");
}

/// Bound value from the update-round margins of a feasible witness.
/// `loss` must be loss_for(name, ...).
double value_from_margins(BoundName name, const UpdateGeometry& geo, std::span<const double> margins,
                          const AdmissibleLoss& loss, double rho) {
    double l1 = 0.0, sq = 0.0;
    for (double m : margins) {
        const double v = loss.eval(m);
        l1 += v;
        sq += v * v;
    }
    switch (name) {
        case BoundName::Novikoff:
            break;
        case BoundName::L1General:
        case BoundName::L1SqHinge:
            return formulas::l1_general(l1, loss.phi0(), loss.gamma(), geo.sq_norm_sum);
        case BoundName::L1GeneralRadius:
        case BoundName::L1SqHingeRadius:
            return formulas::l1_radius(l1, loss.phi0(), loss.gamma(), geo.radius);
        case BoundName::L1Hinge:
            return l1 + std::sqrt(geo.sq_norm_sum) / rho;
        case BoundName::L1HingeRadius: {
            const double a = geo.radius / rho + std::sqrt(l1);
            return a * a;
        }
        case BoundName::L2First:
            return formulas::l2_first(std::sqrt(sq), geo.sq_norm_sum, rho);
        case BoundName::L2Radius:
            return formulas::l2_radius(std::sqrt(sq), geo.radius, rho);
    }
    throw ParameterError("novikoff is not a loss-based bound");
}

BoundReport make_report(BoundName name, double value, Vector witness, double scale, std::size_t mistakes,
                        bool kernelized) {
    BoundReport r;
    r.name = name;
    r.value = value;
    r.witness_u = std::move(witness);
    r.witness_scale = scale;
    r.mistake_count = mistakes;
    r.valid = approx_le(static_cast<double>(mistakes), value);
    r.kernelized = kernelized;
    return r;
}

double min_normalized_margin(std::span<const double> raw_margins, double witness_norm) {
    double m = kInf;
    for (double v : raw_margins) m = std::min(m, v / witness_norm);
    return m;
}

// ---------------------------------------------------------------------------
// Witness spaces for the optimizer.

class PrimalSpace {
public:
    PrimalSpace(const RunTrace& trace, std::span<const LabeledExample> stream)
        : trace_(trace), stream_(stream), dim_(stream.front().features.size()) {}

    std::size_t size() const { return dim_; }
    double norm_of(const Vector& w) const { return norm(w); }

    std::vector<double> margins(const Vector& w) const { return update_margins(w, trace_, stream_); }

    std::vector<double> all_margins(const Vector& w) const {
        std::vector<double> m;
        m.reserve(stream_.size());
        for (const auto& ex : stream_) m.push_back(ex.label * dot(w, ex.features));
        return m;
    }

    // g = sum_{t in I} c_t y_t x_t
    std::pair<Vector, double> gradient(std::span<const double> coeffs) const {
        Vector g(dim_, 0.0);
        for (std::size_t k = 0; k < coeffs.size(); ++k) {
            const auto& ex = stream_[trace_.update_rounds[k]];
            axpy(coeffs[k] * ex.label, ex.features, g);
        }
        const double n = norm(g);
        return {std::move(g), n};
    }

    Vector warm_start() const {
        Vector w = trace_.final_weights;
        const double n = norm(w);
        if (n > 1.0)
            for (double& c : w) c /= n;
        return w;
    }

    Vector random_start(Rng& rng) const { return rng.unit_sphere(dim_); }

private:
    const RunTrace& trace_;
    std::span<const LabeledExample> stream_;
    std::size_t dim_;
};

class KernelSpace {
public:
    KernelSpace(const KernelRunTrace& trace, std::span<const LabeledExample> stream)
        : trace_(trace), stream_(stream), m_(trace.update_rounds.size()), gram_(m_ * m_) {
        const auto& k = trace.final_hypothesis.kernel;
        for (std::size_t i = 0; i < m_; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = k(stream[trace.update_rounds[i]].features, stream[trace.update_rounds[j]].features);
                gram_[i * m_ + j] = gram_[j * m_ + i] = v;
            }
    }

    std::size_t size() const { return m_; }

    double norm_of(const Vector& beta) const {
        double s = 0.0;
        for (std::size_t i = 0; i < m_; ++i) s += beta[i] * dot(row(i), beta);
        return std::sqrt(std::max(s, 0.0));
    }

    std::vector<double> margins(const Vector& beta) const {
        std::vector<double> m(m_);
        for (std::size_t i = 0; i < m_; ++i)
            m[i] = stream_[trace_.update_rounds[i]].label * dot(row(i), beta);
        return m;
    }

    std::vector<double> all_margins(const Vector& beta) const {
        const auto& k = trace_.final_hypothesis.kernel;
        std::vector<double> out;
        out.reserve(stream_.size());
        for (const auto& ex : stream_) {
            double s = 0.0;
            for (std::size_t i = 0; i < m_; ++i)
                s += beta[i] * k(stream_[trace_.update_rounds[i]].features, ex.features);
            out.push_back(ex.label * s);
        }
        return out;
    }

    std::pair<Vector, double> gradient(std::span<const double> coeffs) const {
        Vector g(m_);
        for (std::size_t i = 0; i < m_; ++i) g[i] = coeffs[i] * stream_[trace_.update_rounds[i]].label;
        const double n = norm_of(g);
        return {std::move(g), n};
    }

    Vector warm_start() const {
        Vector beta(m_);
        for (std::size_t i = 0; i < m_; ++i) beta[i] = stream_[trace_.update_rounds[i]].label;
        return normalized(std::move(beta));
    }

    Vector random_start(Rng& rng) const { return normalized(rng.unit_sphere(std::max<std::size_t>(m_, 1)), true); }

private:
    std::span<const double> row(std::size_t i) const { return {gram_.data() + i * m_, m_}; }

    Vector normalized(Vector beta, bool to_sphere = false) const {
        beta.resize(m_);
        const double n = norm_of(beta);
        if (n > 1.0 || (to_sphere && n > 0.0))
            for (double& c : beta) c /= n;
        return beta;
    }

    const KernelRunTrace& trace_;
    std::span<const LabeledExample> stream_;
    std::size_t m_;
    std::vector<double> gram_;
};

struct Best {
    double value = kInf;
    Vector witness;
    double scale = 0.0;

    void offer(double v, const Vector& w, double s) {
        if (v < value) {
            value = v;
            witness = w;
            scale = s;
        }
    }
};

/// Projected subgradient on the loss-norm part of the objective. Every bound
/// here is non-decreasing in ||L||_1 (resp. ||L||_2) for fixed rho, so
/// minimizing that norm minimizes the bound; each iterate is still evaluated
/// on the exact bound expression.
template <class Space, class Visit>
void descend(const Space& space, BoundName name, const AdmissibleLoss& loss, Vector w, std::size_t iters,
             Visit&& visit) {
    const bool l2 = uses_l2(name);
    for (std::size_t k = 0;; ++k) {
        const auto margins = space.margins(w);
        visit(w, margins);
        if (k == iters) break;

        std::vector<double> coeffs(margins.size());
        for (std::size_t i = 0; i < margins.size(); ++i) {
            const double d = loss.subgradient(margins[i]);
            coeffs[i] = l2 ? 2.0 * loss.eval(margins[i]) * d : d;
        }
        auto [g, gn] = space.gradient(coeffs);
        if (!(gn > 0.0)) break;
        const double step = 1.0 / std::sqrt(static_cast<double>(k + 1)) / gn;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * g[i];
        const double n = space.norm_of(w);
        if (n > 1.0)
            for (double& c : w) c /= n;
    }
}

template <class Space>
BoundReport optimize_in(const Space& space, const UpdateGeometry& geo, BoundName name, LossFamily family,
                        const OptimizerOptions& options, bool kernelized) {
    std::vector<double> grid = options.rho_grid.empty() ? default_rho_grid(geo.radius) : options.rho_grid;
    if (grid.empty()) throw ParameterError("rho grid is empty");
    if (options.iters < 1) throw ParameterError("iters must be >= 1");
    for (double r : grid) require_rho(r);
    std::sort(grid.begin(), grid.end());

    Rng rng(options.seed);
    Best best;

    for (double rho : grid) {
        const AdmissibleLoss loss = loss_for(name == BoundName::Novikoff ? BoundName::L1Hinge : name, family, rho,
                                             std::max(geo.radius, kAbsTol));
        if (uses_family(name)) require_admissible(loss, geo.radius);

        const Vector starts[] = {space.warm_start(), space.random_start(rng)};
        for (const auto& start : starts) {
            if (name == BoundName::Novikoff) {
                descend(space, BoundName::L1Hinge, loss, start, options.iters,
                        [&](const Vector& w, const std::vector<double>&) {
                            const double n = space.norm_of(w);
                            if (!(n > 0.0)) return;
                            const double margin = min_normalized_margin(space.all_margins(w), n);
                            if (margin > 0.0) best.offer(formulas::novikoff(geo.radius, margin), w, margin);
                        });
            } else {
                descend(space, name, loss, start, options.iters,
                        [&](const Vector& w, const std::vector<double>& margins) {
                            best.offer(value_from_margins(name, geo, margins, loss, rho), w, rho);
                        });
            }
        }
    }

    if (!std::isfinite(best.value))
        throw InfeasibleWitness("no candidate witness separates the stream with positive margin");
    return make_report(name, best.value, std::move(best.witness), best.scale, geo.mistakes, kernelized);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(BoundName name) {
    for (const auto& e : kNames)
        if (e.name == name) return e.text;
    return "?";
}

std::optional<BoundName> parse_bound_name(std::string_view s) {
    for (const auto& e : kNames)
        if (e.text == s) return e.name;
    return std::nullopt;
}

std::string_view to_string(LossFamily f) {
    switch (f) {
        case LossFamily::Hinge:
            return "hinge";
        case LossFamily::SquaredHinge:
            return "sqhinge";
        case LossFamily::Huber:
            return "huber";
    }
    return "?";
}

std::optional<LossFamily> parse_loss_family(std::string_view s) {
    if (s == "hinge") return LossFamily::Hinge;
    if (s == "sqhinge") return LossFamily::SquaredHinge;
    if (s == "huber") return LossFamily::Huber;
    return std::nullopt;
}

AdmissibleLoss make_family_loss(LossFamily family, double rho, double radius) {
    switch (family) {
        case LossFamily::Hinge:
            return make_hinge(rho);
        case LossFamily::SquaredHinge:
            return make_squared_hinge(rho, radius);
        case LossFamily::Huber:
            return make_huber(1.0, 1.0, rho);
    }
    throw ParameterError("unknown loss family");
}

std::string_view to_string(NormRegime r) {
    switch (r) {
        case NormRegime::L2Tighter:
            return "L2Tighter";
        case NormRegime::L1Tighter:
            return "L1Tighter";
        case NormRegime::Mixed:
            return "Mixed";
    }
    return "?";
}

UpdateGeometry geometry_of(const RunTrace& trace) {
    return {trace.mistake_count, trace.sq_norm_sum_I, trace.radius};
}

UpdateGeometry geometry_of(const KernelRunTrace& trace) {
    return {trace.mistake_count, trace.kernel_trace, trace.radius};
}

namespace formulas {

double novikoff(double radius, double rho) { return radius * radius / (rho * rho); }

double l1_general(double loss_l1, double phi0, double gamma, double sq_norm_sum) {
    return loss_l1 / phi0 + gamma / phi0 * std::sqrt(sq_norm_sum);
}

double l1_radius(double loss_l1, double phi0, double gamma, double radius) {
    const double a = gamma * radius / phi0 + std::sqrt(loss_l1 / phi0);
    return a * a;
}

double l2_first(double loss_l2, double sq_norm_sum, double rho) {
    const double half = loss_l2 / 2.0;
    const double a = half + std::sqrt(half * half + std::sqrt(sq_norm_sum) / rho);
    return a * a;
}

double l2_radius(double loss_l2, double radius, double rho) {
    const double a = radius / rho + loss_l2;
    return a * a;
}

}  // namespace formulas

// ---------------------------------------------------------------------------

BoundReport novikoff_bound(const RunTrace& trace, std::span<const LabeledExample> stream,
                           std::span<const double> v, double rho) {
    require_bound_preconditions(trace);
    require_consistent(trace, stream);
    require_rho(rho);
    if (v.size() != stream.front().features.size()) throw InvalidInput("witness dimension does not match the stream");
    const double vn = norm(v);
    if (!(vn > 0.0)) throw InfeasibleWitness("separator must be non-zero");
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const double margin = stream[t].label * dot(v, stream[t].features) / vn;
        if (!approx_le(rho, margin))
            throw InfeasibleWitness("margin assumption violated at round " + std::to_string(t + 1) + ": " +
                                    std::to_string(margin) + " < " + std::to_string(rho));
    }
    Vector u(v.begin(), v.end());
    for (double& c : u) c /= vn;
    return make_report(BoundName::Novikoff, formulas::novikoff(trace.radius, rho), std::move(u), rho,
                       trace.mistake_count, false);
}

BoundReport l1_bound(const RunTrace& trace, std::span<const LabeledExample> stream, const AdmissibleLoss& loss,
                     std::span<const double> u, L1Form form) {
    require_bound_preconditions(trace);
    require_admissible(loss, trace.radius);
    const LossVector lv = loss_vector(loss, u, trace, stream);
    const auto geo = geometry_of(trace);
    const bool radius_form = form == L1Form::RadiusForm;
    const double value = radius_form ? formulas::l1_radius(lv.l1, loss.phi0(), loss.gamma(), geo.radius)
                                     : formulas::l1_general(lv.l1, loss.phi0(), loss.gamma(), geo.sq_norm_sum);
    const double scale = loss.kind() == AdmissibleLoss::Kind::Custom ? loss.gamma() : loss.rho();
    return make_report(radius_form ? BoundName::L1GeneralRadius : BoundName::L1General, value,
                       Vector(u.begin(), u.end()), scale, trace.mistake_count, false);
}

BoundReport hinge_l1_bound(const RunTrace& trace, std::span<const LabeledExample> stream, double rho,
                           std::span<const double> u, L1Form form) {
    return evaluate_bound(form == L1Form::General ? BoundName::L1Hinge : BoundName::L1HingeRadius, trace, stream,
                          LossFamily::Hinge, rho, u);
}

BoundReport sq_hinge_l1_bound(const RunTrace& trace, std::span<const LabeledExample> stream, double rho,
                              std::span<const double> u, L1Form form) {
    return evaluate_bound(form == L1Form::General ? BoundName::L1SqHinge : BoundName::L1SqHingeRadius, trace,
                          stream, LossFamily::SquaredHinge, rho, u);
}

BoundReport l2_bound(const RunTrace& trace, std::span<const LabeledExample> stream, double rho,
                     std::span<const double> u, L2Form form) {
    return evaluate_bound(form == L2Form::First ? BoundName::L2First : BoundName::L2Radius, trace, stream,
                          LossFamily::Hinge, rho, u);
}

BoundReport evaluate_bound(BoundName name, const RunTrace& trace, std::span<const LabeledExample> stream,
                           LossFamily family, double rho, std::span<const double> u) {
    if (name == BoundName::Novikoff) return novikoff_bound(trace, stream, u, rho);
    require_bound_preconditions(trace);
    require_rho(rho);
    require_unit_ball(u);
    const auto geo = geometry_of(trace);
    const AdmissibleLoss loss = loss_for(name, family, rho, std::max(geo.radius, kAbsTol));
    if (uses_family(name)) require_admissible(loss, geo.radius);
    const auto margins = update_margins(u, trace, stream);
    return make_report(name, value_from_margins(name, geo, margins, loss, rho), Vector(u.begin(), u.end()), rho,
                       geo.mistakes, false);
}

NormRegime classify_regime(std::span<const double> losses) {
    // Zero losses add nothing to either norm and are skipped.
    const auto all = [&](auto pred) {
        return std::all_of(losses.begin(), losses.end(), [&](double v) { return v == 0.0 || pred(v); });
    };
    if (all([](double v) { return v <= 1.0; })) return NormRegime::L2Tighter;
    if (all([](double v) { return v >= 1.0; })) return NormRegime::L1Tighter;
    return NormRegime::Mixed;
}

NormComparison compare_norms(const RunTrace& trace, std::span<const LabeledExample> stream, double rho,
                             std::span<const double> u) {
    require_rho(rho);
    const LossVector lv = loss_vector(make_hinge(rho), u, trace, stream);
    NormComparison c;
    c.l1 = lv.l1;
    c.l2_squared = lv.l2 * lv.l2;
    c.regime = classify_regime(lv.values);
    return c;
}

// ---------------------------------------------------------------------------

double kernel_witness_norm(const KernelRunTrace& trace, std::span<const LabeledExample> stream,
                           std::span<const double> beta) {
    if (beta.size() != trace.update_rounds.size())
        throw InvalidInput("dual witness must have one coefficient per update round");
    return KernelSpace(trace, stream).norm_of(Vector(beta.begin(), beta.end()));
}

BoundReport evaluate_kernel_bound(BoundName name, const KernelRunTrace& trace,
                                  std::span<const LabeledExample> stream, LossFamily family, double rho,
                                  std::span<const double> beta) {
    if (trace.rounds() != stream.size()) throw InvalidInput("kernel trace does not match the stream");
    if (beta.size() != trace.update_rounds.size())
        throw InvalidInput("dual witness must have one coefficient per update round");
    require_rho(rho);
    const KernelSpace space(trace, stream);
    const Vector b(beta.begin(), beta.end());
    const double n = space.norm_of(b);
    const auto geo = geometry_of(trace);

    if (name == BoundName::Novikoff) {
        if (!(n > 0.0)) throw InfeasibleWitness("separator must be non-zero");
        const auto all = space.all_margins(b);
        for (std::size_t t = 0; t < all.size(); ++t)
            if (!approx_le(rho, all[t] / n))
                throw InfeasibleWitness("margin assumption violated at round " + std::to_string(t + 1));
        return make_report(name, formulas::novikoff(geo.radius, rho), b, rho, geo.mistakes, true);
    }

    if (!(n <= 1.0 + kUnitBallSlack)) throw InfeasibleWitness("dual witness has RKHS norm " + std::to_string(n) + " > 1");
    const AdmissibleLoss loss = loss_for(name, family, rho, std::max(geo.radius, kAbsTol));
    if (uses_family(name)) require_admissible(loss, geo.radius);
    return make_report(name, value_from_margins(name, geo, space.margins(b), loss, rho), b, rho, geo.mistakes, true);
}

// ---------------------------------------------------------------------------

std::vector<double> default_rho_grid(double radius, std::size_t count) {
    const double r = radius > 0.0 ? radius : 1.0;
    std::vector<double> g(count);
    if (count == 1) {
        g[0] = r;
        return g;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double e = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(count - 1);
        g[i] = r * std::pow(10.0, e);
    }
    return g;
}

BoundReport optimize_bound(const RunTrace& trace, std::span<const LabeledExample> stream, BoundName name,
                           LossFamily family, const OptimizerOptions& options) {
    require_bound_preconditions(trace);
    require_consistent(trace, stream);
    return optimize_in(PrimalSpace(trace, stream), geometry_of(trace), name, family, options, false);
}

BoundReport optimize_kernel_bound(const KernelRunTrace& trace, std::span<const LabeledExample> stream,
                                  BoundName name, LossFamily family, const OptimizerOptions& options) {
    if (trace.rounds() != stream.size()) throw InvalidInput("kernel trace does not match the stream");
    return optimize_in(KernelSpace(trace, stream), geometry_of(trace), name, family, options, true);
}

}  // namespace pmb
