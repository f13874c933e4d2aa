#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmb/bounds.hpp"
#include "pmb/data.hpp"
#include "pmb/perceptron.hpp"

namespace pmb {

/// A loss of the margin y h(x) with values in [0, 1].
struct BoundedLoss {
    std::string name;
    std::function<double(double)> eval;

    /// 1 if margin <= 0 else 0: matches the update rule, so the online
    /// average equals M_T / T.
    static BoundedLoss zero_one();
    /// min(1, max(0, 1 - margin / rho)).
    static BoundedLoss clipped_hinge(double rho);
};

struct SelectionResult {
    std::size_t chosen_index = 0;  // 0-based: hypothesis entering round chosen_index
    double suffix_risk = 0.0;
    double penalty = 0.0;
    std::vector<double> objective_per_index;
};

/// Confidence penalty sqrt(log(T(T+1)/delta) / (2 * suffix_len)).
double selection_penalty(std::size_t rounds, std::size_t suffix_len, double delta);

/// Core rule on a precomputed loss table: losses[i][k] is the loss of
/// hypothesis i on round i + k (row i has T - i entries). Ties go to the
/// smallest index.
SelectionResult select_from_losses(const std::vector<std::vector<double>>& losses, double delta);

/// Penalized risk minimizing hypothesis among the trace's intermediate
/// hypotheses w_1 .. w_T (w_i is the weight held entering round i).
SelectionResult select_penalized(const RunTrace& trace, std::span<const LabeledExample> stream,
                                 const BoundedLoss& loss, double delta);

struct GeneralizationReport {
    std::string bound_name;  // cbcg | l1_gen | l2_gen
    double rhs = 0.0;
    double empirical_online_loss = 0.0;  // cbcg: online average; corollaries: mistake-bound term / T
    double confidence_term = 0.0;        // 6 sqrt(log(2(T+1)/delta) / T)
    std::optional<double> test_error_estimate;
    std::optional<bool> holds;  // absent when no test estimate is available
};

double confidence_term(std::size_t rounds, double delta);

/// (1/T) sum_t L(y_t h_t(x_t)) + 6 sqrt(log(2(T+1)/delta) / T).
GeneralizationReport cbcg_rhs(const RunTrace& trace, std::span<const LabeledExample> stream,
                              const BoundedLoss& loss, double delta);

enum class GeneralizationKind { L1Gen, L2Gen };

/// Mistake-bound term / T plus the confidence term. L1Gen uses the given
/// admissible loss; L2Gen uses the rho-hinge.
GeneralizationReport generalization_bound_rhs(const RunTrace& trace, std::span<const LabeledExample> stream,
                                              GeneralizationKind kind, const AdmissibleLoss& loss,
                                              std::span<const double> u, double delta);

struct TrialOutcome {
    double rhs = 0.0;
    double test_error = 0.0;
    std::size_t chosen_index = 0;
    std::size_t mistakes = 0;
    bool violated = false;
};

struct CoverageResult {
    double violation_fraction = 0.0;
    std::size_t violations = 0;
    std::vector<TrialOutcome> trials;
};

/// Draws training and test sets from the generator's distribution per trial
/// (trial seed = seed + trial index), selects h-hat with the zero-one loss and
/// compares its test error to cbcg_rhs.
CoverageResult coverage_experiment(const GeneratorSpec& generator, std::size_t rounds, double delta,
                                   std::size_t trials, std::size_t test_size, std::uint64_t seed);

}  // namespace pmb
