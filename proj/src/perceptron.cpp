#include "pmb/perceptron.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pmb {

namespace {

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

bool fires(UpdateRule rule, int label, double score) {
    const double margin = label * score;
    switch (rule) {
        case UpdateRule::NonPositiveScore:
            return margin <= 0.0;
        case UpdateRule::StrictSignMismatch:
            return margin < 0.0;
    }
    return false;
}

}  // namespace

std::size_t validate_stream(std::span<const LabeledExample> stream) {
    if (stream.empty()) throw InvalidInput("empty stream");
    const std::size_t dim = stream.front().features.size();
    if (dim == 0) throw InvalidInput("examples must have at least one feature");
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const auto& ex = stream[t];
        if (ex.label != 1 && ex.label != -1)
            throw InvalidInput("example " + std::to_string(t + 1) + ": label must be -1 or +1");
        if (ex.features.size() != dim)
            throw InvalidInput("example " + std::to_string(t + 1) + ": dimension " +
                               std::to_string(ex.features.size()) + " != " + std::to_string(dim));
        for (double v : ex.features)
            if (!std::isfinite(v))
                throw InvalidInput("example " + std::to_string(t + 1) + ": non-finite feature");
    }
    return dim;
}

void require_bound_preconditions(const RunTrace& trace) {
    if (trace.eta != 1.0)
        throw PreconditionError("mistake bounds require eta = 1");
    if (!trace.zero_start)
        throw PreconditionError("mistake bounds require a zero initial weight vector");
    if (trace.update_rule != UpdateRule::NonPositiveScore)
        throw PreconditionError("mistake bounds require the non-positive-score update rule");
}

void require_consistent(const RunTrace& trace, std::span<const LabeledExample> stream) {
    if (trace.rounds() != stream.size())
        throw InvalidInput("trace has " + std::to_string(trace.rounds()) + " rounds but stream has " +
                           std::to_string(stream.size()) + " examples");
}

RunTrace run_primal(std::span<const LabeledExample> stream, const PerceptronConfig& config) {
    const std::size_t dim = validate_stream(stream);
    if (!(config.eta > 0.0) || !std::isfinite(config.eta))
        throw ParameterError("eta must be a positive finite number");

    Vector w = config.w0.empty() ? Vector(dim, 0.0) : config.w0;
    if (w.size() != dim) throw InvalidInput("w0 dimension does not match the stream");
    for (double v : w)
        if (!std::isfinite(v)) throw InvalidInput("w0 has a non-finite component");

    RunTrace trace;
    trace.eta = config.eta;
    trace.update_rule = config.update_rule;
    trace.zero_start = std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; });
    trace.per_round.reserve(stream.size());

    for (std::size_t t = 0; t < stream.size(); ++t) {
        const auto& ex = stream[t];
        const double sq = squared_norm(ex.features);
        trace.radius = std::max(trace.radius, std::sqrt(sq));

        RoundRecord rec;
        rec.weight_before = w;
        rec.score = dot(w, ex.features);
        rec.predicted = sign_of(rec.score);
        rec.updated = fires(config.update_rule, ex.label, rec.score);
        if (rec.updated) {
            axpy(config.eta * ex.label, ex.features, w);
            trace.update_rounds.push_back(t);
            trace.sq_norm_sum_I += sq;
        }
        trace.per_round.push_back(std::move(rec));
    }
    trace.final_weights = std::move(w);
    trace.mistake_count = trace.update_rounds.size();
    return trace;
}

// ---------------------------------------------------------------------------

void KernelSpec::validate() const {
    switch (family) {
        case Family::Linear:
            return;
        case Family::Polynomial:
            if (!(offset >= 0.0) || !std::isfinite(offset))
                throw ParameterError("polynomial kernel offset must be >= 0");
            if (degree < 1) throw ParameterError("polynomial kernel degree must be >= 1");
            return;
        case Family::RBF:
            if (!(sigma > 0.0) || !std::isfinite(sigma))
                throw ParameterError("rbf kernel width must be > 0");
            return;
    }
}

double KernelSpec::operator()(std::span<const double> a, std::span<const double> b) const {
    switch (family) {
        case Family::Linear:
            return dot(a, b);
        case Family::Polynomial:
            return std::pow(dot(a, b) + offset, degree);
        case Family::RBF: {
            double d2 = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double d = a[i] - b[i];
                d2 += d * d;
            }
            return std::exp(-d2 / (2.0 * sigma * sigma));
        }
    }
    return 0.0;
}

double DualHypothesis::score(std::span<const LabeledExample> stream, std::span<const double> x) const {
    double s = 0.0;
    for (const auto& e : support) {
        const auto& ex = stream[e.round];
        s += static_cast<double>(e.alpha) * ex.label * kernel(ex.features, x);
    }
    return s;
}

DualHypothesis KernelRunTrace::hypothesis_at(std::size_t t) const {
    DualHypothesis h;
    h.kernel = final_hypothesis.kernel;
    for (const auto& e : final_hypothesis.support)
        if (e.round < t) h.support.push_back(e);
    return h;
}

KernelRunTrace run_kernel(std::span<const LabeledExample> stream, const KernelSpec& kernel) {
    validate_stream(stream);
    kernel.validate();

    KernelRunTrace trace;
    trace.final_hypothesis.kernel = kernel;
    trace.per_round.reserve(stream.size());

    for (std::size_t t = 0; t < stream.size(); ++t) {
        const auto& ex = stream[t];
        const double self = kernel(ex.features, ex.features);
        trace.radius = std::max(trace.radius, std::sqrt(std::max(self, 0.0)));

        // Only rounds s < t can carry non-zero alpha at this point.
        KernelRoundRecord rec;
        rec.score = trace.final_hypothesis.score(stream, ex.features);
        rec.predicted = sign_of(rec.score);
        rec.updated = ex.label * rec.score <= 0.0;
        if (rec.updated) {
            trace.final_hypothesis.support.push_back({t, 1});
            trace.update_rounds.push_back(t);
            trace.kernel_trace += self;
        }
        trace.per_round.push_back(rec);
    }
    trace.mistake_count = trace.update_rounds.size();
    return trace;
}

// ---------------------------------------------------------------------------

Lemma1Stats lemma1_stats(const RunTrace& trace, std::span<const LabeledExample> stream) {
    require_bound_preconditions(trace);
    require_consistent(trace, stream);

    Lemma1Stats st;
    if (stream.empty()) return st;
    Vector sum(stream.front().features.size(), 0.0);
    double sq_sum = 0.0;
    for (std::size_t t : trace.update_rounds) {
        const auto& ex = stream[t];
        const double sq = squared_norm(ex.features);
        axpy(ex.label, ex.features, sum);
        sq_sum += sq;
        const double s = trace.per_round[t].score;
        st.telescoping_sum += 2.0 * ex.label * s + sq;
        st.term_magnitude += 2.0 * std::abs(s) + sq;
    }
    st.lhs = norm(sum);
    st.rhs = std::sqrt(sq_sum);
    st.telescoped = squared_norm(trace.final_weights);
    return st;
}

}  // namespace pmb
