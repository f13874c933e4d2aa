#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmb/losses.hpp"
#include "pmb/perceptron.hpp"

namespace pmb {

enum class BoundName {
    Novikoff,
    L1General,
    L1GeneralRadius,
    L1Hinge,
    L1HingeRadius,
    L1SqHinge,
    L1SqHingeRadius,
    L2First,
    L2Radius,
};

inline constexpr BoundName kAllBounds[] = {
    BoundName::Novikoff,  BoundName::L1General,     BoundName::L1GeneralRadius,
    BoundName::L1Hinge,   BoundName::L1HingeRadius, BoundName::L1SqHinge,
    BoundName::L1SqHingeRadius, BoundName::L2First, BoundName::L2Radius,
};

std::string_view to_string(BoundName name);
std::optional<BoundName> parse_bound_name(std::string_view s);

enum class L1Form { General, RadiusForm };
enum class L2Form { First, RadiusForm };

/// Loss family used by the l1_general bounds and by the optimizer.
enum class LossFamily { Hinge, SquaredHinge, Huber };

std::string_view to_string(LossFamily f);
std::optional<LossFamily> parse_loss_family(std::string_view s);

/// Member of `family` at scale rho. The squared hinge needs the radius of
/// its domain; Huber uses delta = 1, offset = 1.
AdmissibleLoss make_family_loss(LossFamily family, double rho, double radius);

struct BoundReport {
    BoundName name = BoundName::Novikoff;
    double value = 0.0;
    Vector witness_u;  // primal u, or dual coefficients beta for kernel runs
    double witness_scale = 0.0;  // rho, or gamma for l1_general with a custom loss
    std::size_t mistake_count = 0;
    bool valid = false;  // value >= mistake_count
    bool kernelized = false;
};

/// The trace quantities the bounds depend on besides the witness.
struct UpdateGeometry {
    std::size_t mistakes = 0;
    double sq_norm_sum = 0.0;  // sum_{t in I} ||x_t||^2, or the kernel trace
    double radius = 0.0;       // max_t ||x_t||, or max_t sqrt(K(x_t, x_t))
};

UpdateGeometry geometry_of(const RunTrace& trace);
UpdateGeometry geometry_of(const KernelRunTrace& trace);

// Closed forms. Inputs are norms of the loss vector and trace geometry.
namespace formulas {
double novikoff(double radius, double rho);
double l1_general(double loss_l1, double phi0, double gamma, double sq_norm_sum);
double l1_radius(double loss_l1, double phi0, double gamma, double radius);
double l2_first(double loss_l2, double sq_norm_sum, double rho);
double l2_radius(double loss_l2, double radius, double rho);
}  // namespace formulas

// ---------------------------------------------------------------------------
// Primal traces. All of these require trace.satisfies_bound_preconditions().

/// r^2 / rho^2 after checking y_t (v . x_t) / ||v|| >= rho on every round.
BoundReport novikoff_bound(const RunTrace& trace, std::span<const LabeledExample> stream,
                           std::span<const double> v, double rho);

/// Bound for an arbitrary admissible loss (rejected if the loss fails its
/// admissibility check on the margins' range).
BoundReport l1_bound(const RunTrace& trace, std::span<const LabeledExample> stream,
                     const AdmissibleLoss& loss, std::span<const double> u, L1Form form);

/// rho-hinge instance: ||L||_1 + R/rho, or (r/rho + sqrt(||L||_1))^2.
BoundReport hinge_l1_bound(const RunTrace& trace, std::span<const LabeledExample> stream, double rho,
                           std::span<const double> u, L1Form form);

/// rho-squared-hinge instance with r = trace radius.
BoundReport sq_hinge_l1_bound(const RunTrace& trace, std::span<const LabeledExample> stream, double rho,
                              std::span<const double> u, L1Form form);

BoundReport l2_bound(const RunTrace& trace, std::span<const LabeledExample> stream, double rho,
                     std::span<const double> u, L2Form form);

/// Evaluates `name` at witness (u, rho). For L1General* the loss comes from
/// `family` at scale rho; other bounds ignore `family`.
BoundReport evaluate_bound(BoundName name, const RunTrace& trace, std::span<const LabeledExample> stream,
                           LossFamily family, double rho, std::span<const double> u);

enum class NormRegime { L2Tighter, L1Tighter, Mixed };
std::string_view to_string(NormRegime r);

struct NormComparison {
    double l1 = 0.0;
    double l2_squared = 0.0;
    NormRegime regime = NormRegime::L2Tighter;
};

/// Over the non-zero losses: L2Tighter if every one is <= 1, else L1Tighter
/// if every one is >= 1, else Mixed.
NormRegime classify_regime(std::span<const double> losses);

NormComparison compare_norms(const RunTrace& trace, std::span<const LabeledExample> stream, double rho,
                             std::span<const double> u);

// ---------------------------------------------------------------------------
// Kernel traces. The witness is beta over the update rounds (in order):
// u = sum_s beta_s phi(x_{I_s}), ||u||^2 = beta' K_I beta.

double kernel_witness_norm(const KernelRunTrace& trace, std::span<const LabeledExample> stream,
                           std::span<const double> beta);

BoundReport evaluate_kernel_bound(BoundName name, const KernelRunTrace& trace,
                                  std::span<const LabeledExample> stream, LossFamily family, double rho,
                                  std::span<const double> beta);

// ---------------------------------------------------------------------------

struct OptimizerOptions {
    std::vector<double> rho_grid;  // empty: default_rho_grid(radius)
    std::size_t iters = 200;
    std::uint64_t seed = 0;
};

/// `count` log-spaced values over [1e-2 r, 1e2 r].
std::vector<double> default_rho_grid(double radius, std::size_t count = 25);

/// Tightest report found by projected subgradient over the unit ball for
/// each rho in the grid. Every returned report is a feasible witness, hence
/// a valid bound, whether or not the optimizer converged.
/// Novikoff: throws InfeasibleWitness if no candidate separates the stream.
BoundReport optimize_bound(const RunTrace& trace, std::span<const LabeledExample> stream, BoundName name,
                           LossFamily family, const OptimizerOptions& options);

BoundReport optimize_kernel_bound(const KernelRunTrace& trace, std::span<const LabeledExample> stream,
                                  BoundName name, LossFamily family, const OptimizerOptions& options);

}  // namespace pmb
