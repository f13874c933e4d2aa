#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pmb/common.hpp"

namespace pmb {

struct LabeledExample {
    Vector features;
    int label = 1;  // -1 or +1

    bool operator==(const LabeledExample&) const = default;
};

using Stream = std::vector<LabeledExample>;

/// Checks the stream is non-empty, labels are +-1, features finite and of a
/// common dimension. Returns that dimension.
std::size_t validate_stream(std::span<const LabeledExample> stream);

enum class UpdateRule {
    NonPositiveScore,    // update iff y * (w . x) <= 0
    StrictSignMismatch,  // update iff sgn(w . x) != y, with sgn(0) = 0
};

struct PerceptronConfig {
    double eta = 1.0;
    Vector w0;  // empty means the zero vector of the stream's dimension
    UpdateRule update_rule = UpdateRule::NonPositiveScore;
};

struct RoundRecord {
    Vector weight_before;
    double score = 0.0;  // w_t . x_t
    int predicted = 0;   // sgn(score), 0 when score == 0
    bool updated = false;
};

struct RunTrace {
    std::vector<RoundRecord> per_round;
    std::vector<std::size_t> update_rounds;  // 0-based, ascending
    Vector final_weights;
    std::size_t mistake_count = 0;
    double radius = 0.0;         // max_t ||x_t|| over the whole stream
    double sq_norm_sum_I = 0.0;  // sum over update rounds of ||x_t||^2

    double eta = 1.0;
    bool zero_start = true;
    UpdateRule update_rule = UpdateRule::NonPositiveScore;

    std::size_t rounds() const noexcept { return per_round.size(); }

    /// True when the run matches the setting every mistake bound assumes:
    /// unit step, zero start, updates on non-positive scores.
    bool satisfies_bound_preconditions() const noexcept {
        return eta == 1.0 && zero_start && update_rule == UpdateRule::NonPositiveScore;
    }
};

/// Throws PreconditionError unless trace.satisfies_bound_preconditions().
void require_bound_preconditions(const RunTrace& trace);

/// Throws InvalidInput if the stream is not the one the trace was built on
/// (length mismatch).
void require_consistent(const RunTrace& trace, std::span<const LabeledExample> stream);

RunTrace run_primal(std::span<const LabeledExample> stream, const PerceptronConfig& config = {});

// ---------------------------------------------------------------------------
// Kernels

struct KernelSpec {
    enum class Family { Linear, Polynomial, RBF };

    Family family = Family::Linear;
    double offset = 0.0;  // polynomial: (x.y + offset)^degree, offset >= 0
    int degree = 1;       // polynomial, >= 1
    double sigma = 1.0;   // rbf: exp(-||x-y||^2 / (2 sigma^2)), sigma > 0

    static KernelSpec linear() { return {}; }
    static KernelSpec polynomial(double offset, int degree) {
        return {Family::Polynomial, offset, degree, 1.0};
    }
    static KernelSpec rbf(double sigma) { return {Family::RBF, 0.0, 1, sigma}; }

    void validate() const;
    double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct SupportEntry {
    std::size_t round = 0;  // 0-based stream index
    std::size_t alpha = 0;  // number of updates made at that round
};

struct DualHypothesis {
    std::vector<SupportEntry> support;
    KernelSpec kernel;

    /// sum_s alpha_s y_s K(x_s, x); stream supplies the support points.
    double score(std::span<const LabeledExample> stream, std::span<const double> x) const;
};

struct KernelRoundRecord {
    double score = 0.0;
    int predicted = 0;
    bool updated = false;
};

struct KernelRunTrace {
    std::vector<KernelRoundRecord> per_round;
    std::vector<std::size_t> update_rounds;
    DualHypothesis final_hypothesis;
    std::size_t mistake_count = 0;
    double radius = 0.0;        // max_t sqrt(K(x_t, x_t))
    double kernel_trace = 0.0;  // sum over update rounds of K(x_t, x_t)

    std::size_t rounds() const noexcept { return per_round.size(); }

    /// The hypothesis held when entering round t (support restricted to s < t).
    DualHypothesis hypothesis_at(std::size_t t) const;
};

/// Kernel Perceptron from a zero dual start. Updates iff y_t * score <= 0.
KernelRunTrace run_kernel(std::span<const LabeledExample> stream, const KernelSpec& kernel);

// ---------------------------------------------------------------------------

struct Lemma1Stats {
    double lhs = 0.0;              // || sum_{t in I} y_t x_t ||
    double rhs = 0.0;              // sqrt(sum_{t in I} ||x_t||^2)
    double telescoped = 0.0;       // ||w_{T+1}||^2
    double telescoping_sum = 0.0;  // sum_{t in I} (2 y_t (w_t . x_t) + ||x_t||^2)
    double term_magnitude = 0.0;   // sum_{t in I} (2 |w_t . x_t| + ||x_t||^2)

    bool inequality_holds() const { return approx_le(lhs, rhs); }

    // The summands cancel, so the tolerance is relative to their magnitude.
    bool identity_holds() const {
        return std::abs(telescoped - telescoping_sum) <=
               kRelTol * std::max(term_magnitude, std::abs(telescoped)) + kAbsTol;
    }
};

Lemma1Stats lemma1_stats(const RunTrace& trace, std::span<const LabeledExample> stream);

}  // namespace pmb
