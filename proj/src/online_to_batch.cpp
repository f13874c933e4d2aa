#include "pmb/online_to_batch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pmb {

namespace {

void require_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
}

double bounded_eval(const BoundedLoss& loss, double margin) {
    const double v = loss.eval(margin);
    if (!(v >= 0.0 && v <= 1.0))
        throw InvalidInput("loss '" + loss.name + "' returned " + std::to_string(v) + ", outside [0, 1]");
    return v;
}

}  // namespace

BoundedLoss BoundedLoss::zero_one() {
    return {"zero_one", [](double m) { return m <= 0.0 ? 1.0 : 0.0; }};
}

BoundedLoss BoundedLoss::clipped_hinge(double rho) {
    if (!(rho > 0.0)) throw ParameterError("rho must be > 0");
    return {"clipped_hinge", [rho](double m) { return std::clamp(1.0 - m / rho, 0.0, 1.0); }};
}

double selection_penalty(std::size_t rounds, std::size_t suffix_len, double delta) {
    const double t = static_cast<double>(rounds);
    return std::sqrt(std::log(t * (t + 1.0) / delta) / (2.0 * static_cast<double>(suffix_len)));
}

SelectionResult select_from_losses(const std::vector<std::vector<double>>& losses, double delta) {
    require_delta(delta);
    const std::size_t T = losses.size();
    if (T == 0) throw InvalidInput("need at least one hypothesis");

    SelectionResult res;
    res.objective_per_index.resize(T);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < T; ++i) {
        const auto& row = losses[i];
        if (row.size() != T - i)
            throw InvalidInput("loss row " + std::to_string(i) + " must have " + std::to_string(T - i) + " entries");
        double sum = 0.0;
        for (double v : row) sum += v;
        const double risk = sum / static_cast<double>(row.size());
        const double pen = selection_penalty(T, row.size(), delta);
        const double obj = risk + pen;
        res.objective_per_index[i] = obj;
        if (obj < best) {
            best = obj;
            res.chosen_index = i;
            res.suffix_risk = risk;
            res.penalty = pen;
        }
    }
    return res;
}

SelectionResult select_penalized(const RunTrace& trace, std::span<const LabeledExample> stream,
                                 const BoundedLoss& loss, double delta) {
    require_delta(delta);
    require_consistent(trace, stream);
    const std::size_t T = trace.rounds();
    std::vector<std::vector<double>> table(T);
    for (std::size_t i = 0; i < T; ++i) {
        const auto& w = trace.per_round[i].weight_before;
        table[i].reserve(T - i);
        for (std::size_t t = i; t < T; ++t)
            table[i].push_back(bounded_eval(loss, stream[t].label * dot(w, stream[t].features)));
    }
    return select_from_losses(table, delta);
}

double confidence_term(std::size_t rounds, double delta) {
    const double t = static_cast<double>(rounds);
    return 6.0 * std::sqrt(std::log(2.0 * (t + 1.0) / delta) / t);
}

GeneralizationReport cbcg_rhs(const RunTrace& trace, std::span<const LabeledExample> stream,
                              const BoundedLoss& loss, double delta) {
    require_delta(delta);
    require_consistent(trace, stream);
    const std::size_t T = trace.rounds();
    if (T == 0) throw InvalidInput("empty trace");
    double sum = 0.0;
    for (std::size_t t = 0; t < T; ++t) sum += bounded_eval(loss, stream[t].label * trace.per_round[t].score);

    GeneralizationReport rep;
    rep.bound_name = "cbcg";
    rep.empirical_online_loss = sum / static_cast<double>(T);
    rep.confidence_term = confidence_term(T, delta);
    rep.rhs = rep.empirical_online_loss + rep.confidence_term;
    return rep;
}

GeneralizationReport generalization_bound_rhs(const RunTrace& trace, std::span<const LabeledExample> stream,
                                              GeneralizationKind kind, const AdmissibleLoss& loss,
                                              std::span<const double> u, double delta) {
    require_delta(delta);
    const double T = static_cast<double>(trace.rounds());
    GeneralizationReport rep;
    double mistake_term = 0.0;
    if (kind == GeneralizationKind::L1Gen) {
        rep.bound_name = "l1_gen";
        mistake_term = l1_bound(trace, stream, loss, u, L1Form::General).value;
    } else {
        if (loss.kind() != AdmissibleLoss::Kind::Hinge) throw ParameterError("l2_gen is stated for the rho-hinge loss");
        rep.bound_name = "l2_gen";
        mistake_term = l2_bound(trace, stream, loss.rho(), u, L2Form::First).value;
    }
    rep.empirical_online_loss = mistake_term / T;
    rep.confidence_term = confidence_term(trace.rounds(), delta);
    rep.rhs = rep.empirical_online_loss + rep.confidence_term;
    return rep;
}

CoverageResult coverage_experiment(const GeneratorSpec& generator, std::size_t rounds, double delta,
                                   std::size_t trials, std::size_t test_size, std::uint64_t seed) {
    require_delta(delta);
    if (trials < 1) throw ParameterError("trials must be >= 1");
    if (test_size < 1) throw ParameterError("test size must be >= 1");
    if (rounds < 1) throw ParameterError("T must be >= 1");

    const ExampleDistribution dist(generator);
    const BoundedLoss zero_one = BoundedLoss::zero_one();

    CoverageResult res;
    res.trials.reserve(trials);
    for (std::size_t k = 0; k < trials; ++k) {
        Rng rng(seed + k);
        const Stream train = dist.sample(rounds, rng);
        const Stream test = dist.sample(test_size, rng);

        const RunTrace trace = run_primal(train);
        const SelectionResult sel = select_penalized(trace, train, zero_one, delta);
        const auto& w = trace.per_round[sel.chosen_index].weight_before;

        double errors = 0.0;
        for (const auto& ex : test) errors += zero_one.eval(ex.label * dot(w, ex.features));

        TrialOutcome out;
        out.rhs = cbcg_rhs(trace, train, zero_one, delta).rhs;
        out.test_error = errors / static_cast<double>(test.size());
        out.chosen_index = sel.chosen_index;
        out.mistakes = trace.mistake_count;
        out.violated = out.test_error > out.rhs;
        res.violations += out.violated ? 1 : 0;
        res.trials.push_back(out);
    }
    res.violation_fraction = static_cast<double>(res.violations) / static_cast<double>(trials);
    return res;
}

}  // namespace pmb
