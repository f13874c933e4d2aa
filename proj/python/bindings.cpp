#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pmb/bounds.hpp"
#include "pmb/data.hpp"
#include "pmb/losses.hpp"
#include "pmb/online_to_batch.hpp"
#include "pmb/perceptron.hpp"

namespace py = pybind11;
using namespace pmb;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Perceptron mistake bounds: traces, loss-based bounds and online-to-batch conversion";

    auto base = py::register_exception<Error>(m, "PmbError", PyExc_RuntimeError);
    py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<InfeasibleWitness>(m, "InfeasibleWitness", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    // -- perceptron ---------------------------------------------------------
    py::class_<LabeledExample>(m, "LabeledExample")
        .def(py::init<>())
        .def(py::init([](Vector x, int y) { return LabeledExample{std::move(x), y}; }), py::arg("features"),
             py::arg("label"))
        .def_readwrite("features", &LabeledExample::features)
        .def_readwrite("label", &LabeledExample::label)
        .def(py::self == py::self)
        .def("__repr__", [](const LabeledExample& e) {
            return "LabeledExample(" + py::repr(py::cast(e.features)).cast<std::string>() + ", " +
                   std::to_string(e.label) + ")";
        });

    py::enum_<UpdateRule>(m, "UpdateRule")
        .value("NonPositiveScore", UpdateRule::NonPositiveScore)
        .value("StrictSignMismatch", UpdateRule::StrictSignMismatch);

    py::class_<PerceptronConfig>(m, "PerceptronConfig")
        .def(py::init<>())
        .def_readwrite("eta", &PerceptronConfig::eta)
        .def_readwrite("w0", &PerceptronConfig::w0)
        .def_readwrite("update_rule", &PerceptronConfig::update_rule);

    py::class_<RoundRecord>(m, "RoundRecord")
        .def_readonly("weight_before", &RoundRecord::weight_before)
        .def_readonly("score", &RoundRecord::score)
        .def_readonly("predicted", &RoundRecord::predicted)
        .def_readonly("updated", &RoundRecord::updated);

    py::class_<RunTrace>(m, "RunTrace")
        .def_readonly("per_round", &RunTrace::per_round)
        .def_readonly("update_rounds", &RunTrace::update_rounds)
        .def_readonly("final_weights", &RunTrace::final_weights)
        .def_readonly("mistake_count", &RunTrace::mistake_count)
        .def_readonly("radius", &RunTrace::radius)
        .def_readonly("sq_norm_sum_I", &RunTrace::sq_norm_sum_I)
        .def_readonly("eta", &RunTrace::eta)
        .def_property_readonly("rounds", &RunTrace::rounds)
        .def("satisfies_bound_preconditions", &RunTrace::satisfies_bound_preconditions);

    m.def("run_primal", [](const Stream& s, const PerceptronConfig& c) { return run_primal(s, c); }, py::arg("stream"),
          py::arg("config") = PerceptronConfig{});

    py::class_<KernelSpec> ks(m, "KernelSpec");
    py::enum_<KernelSpec::Family>(ks, "Family")
        .value("Linear", KernelSpec::Family::Linear)
        .value("Polynomial", KernelSpec::Family::Polynomial)
        .value("RBF", KernelSpec::Family::RBF);
    ks.def(py::init<>())
        .def_readwrite("family", &KernelSpec::family)
        .def_readwrite("offset", &KernelSpec::offset)
        .def_readwrite("degree", &KernelSpec::degree)
        .def_readwrite("sigma", &KernelSpec::sigma)
        .def_static("linear", &KernelSpec::linear)
        .def_static("polynomial", &KernelSpec::polynomial, py::arg("offset"), py::arg("degree"))
        .def_static("rbf", &KernelSpec::rbf, py::arg("sigma"))
        .def("__call__", [](const KernelSpec& k, const Vector& a, const Vector& b) { return k(a, b); });

    py::class_<SupportEntry>(m, "SupportEntry")
        .def_readonly("round", &SupportEntry::round)
        .def_readonly("alpha", &SupportEntry::alpha);

    py::class_<DualHypothesis>(m, "DualHypothesis")
        .def_readonly("support", &DualHypothesis::support)
        .def_readonly("kernel", &DualHypothesis::kernel)
        .def("score", [](const DualHypothesis& h, const Stream& s, const Vector& x) { return h.score(s, x); });

    py::class_<KernelRoundRecord>(m, "KernelRoundRecord")
        .def_readonly("score", &KernelRoundRecord::score)
        .def_readonly("predicted", &KernelRoundRecord::predicted)
        .def_readonly("updated", &KernelRoundRecord::updated);

    py::class_<KernelRunTrace>(m, "KernelRunTrace")
        .def_readonly("per_round", &KernelRunTrace::per_round)
        .def_readonly("update_rounds", &KernelRunTrace::update_rounds)
        .def_readonly("final_hypothesis", &KernelRunTrace::final_hypothesis)
        .def_readonly("mistake_count", &KernelRunTrace::mistake_count)
        .def_readonly("radius", &KernelRunTrace::radius)
        .def_readonly("kernel_trace", &KernelRunTrace::kernel_trace)
        .def_property_readonly("rounds", &KernelRunTrace::rounds)
        .def("hypothesis_at", &KernelRunTrace::hypothesis_at);

    m.def("run_kernel", [](const Stream& s, const KernelSpec& k) { return run_kernel(s, k); }, py::arg("stream"),
          py::arg("kernel"));

    py::class_<Lemma1Stats>(m, "Lemma1Stats")
        .def_readonly("lhs", &Lemma1Stats::lhs)
        .def_readonly("rhs", &Lemma1Stats::rhs)
        .def_readonly("telescoped", &Lemma1Stats::telescoped)
        .def_readonly("telescoping_sum", &Lemma1Stats::telescoping_sum)
        .def("inequality_holds", &Lemma1Stats::inequality_holds)
        .def("identity_holds", &Lemma1Stats::identity_holds);

    m.def("lemma1_stats", [](const RunTrace& t, const Stream& s) { return lemma1_stats(t, s); });

    // -- losses -------------------------------------------------------------
    py::class_<Interval>(m, "Interval")
        .def(py::init([](double lo, double hi) { return Interval{lo, hi}; }), py::arg("lo"), py::arg("hi"))
        .def_readwrite("lo", &Interval::lo)
        .def_readwrite("hi", &Interval::hi);

    py::class_<AdmissibleLoss>(m, "AdmissibleLoss")
        .def_static("custom", &AdmissibleLoss::custom, py::arg("name"), py::arg("gamma"), py::arg("fn"),
                    py::arg("domain") = Interval{})
        .def("__call__", &AdmissibleLoss::eval)
        .def("eval", &AdmissibleLoss::eval)
        .def("subgradient", &AdmissibleLoss::subgradient)
        .def("with_gamma", &AdmissibleLoss::with_gamma)
        .def_property_readonly("name", &AdmissibleLoss::name)
        .def_property_readonly("gamma", &AdmissibleLoss::gamma)
        .def_property_readonly("phi0", &AdmissibleLoss::phi0)
        .def_property_readonly("domain", &AdmissibleLoss::domain);

    m.def("make_hinge", &make_hinge, py::arg("rho"));
    m.def("make_squared_hinge", &make_squared_hinge, py::arg("rho"), py::arg("radius"));
    m.def("make_huber", &make_huber, py::arg("delta"), py::arg("offset") = 1.0, py::arg("scale") = 1.0);

    py::class_<ConditionResult>(m, "ConditionResult")
        .def_readonly("passed", &ConditionResult::pass)
        .def_readonly("worst", &ConditionResult::worst)
        .def_readonly("witness", &ConditionResult::witness);

    py::class_<AdmissibilityReport>(m, "AdmissibilityReport")
        .def_readonly("non_negative", &AdmissibilityReport::non_negative)
        .def_readonly("positive_at_zero", &AdmissibilityReport::positive_at_zero)
        .def_readonly("convex", &AdmissibilityReport::convex)
        .def_readonly("lipschitz", &AdmissibilityReport::lipschitz)
        .def("all_pass", &AdmissibilityReport::all_pass);

    m.def("check_admissibility", &check_admissibility, py::arg("loss"), py::arg("domain"),
          py::arg("grid_size") = 1001);

    py::class_<LossVector>(m, "LossVector")
        .def_readonly("values", &LossVector::values)
        .def_readonly("l1", &LossVector::l1)
        .def_readonly("l2", &LossVector::l2);

    m.def("loss_vector", [](const AdmissibleLoss& l, const Vector& u, const RunTrace& t, const Stream& s) {
        return loss_vector(l, u, t, s);
    });

    // -- bounds -------------------------------------------------------------
    py::enum_<BoundName>(m, "BoundName")
        .value("novikoff", BoundName::Novikoff)
        .value("l1_general", BoundName::L1General)
        .value("l1_general_radius", BoundName::L1GeneralRadius)
        .value("l1_hinge", BoundName::L1Hinge)
        .value("l1_hinge_radius", BoundName::L1HingeRadius)
        .value("l1_sq_hinge", BoundName::L1SqHinge)
        .value("l1_sq_hinge_radius", BoundName::L1SqHingeRadius)
        .value("l2_first", BoundName::L2First)
        .value("l2_radius", BoundName::L2Radius);

    py::enum_<L1Form>(m, "L1Form").value("General", L1Form::General).value("RadiusForm", L1Form::RadiusForm);
    py::enum_<L2Form>(m, "L2Form").value("First", L2Form::First).value("RadiusForm", L2Form::RadiusForm);
    py::enum_<LossFamily>(m, "LossFamily")
        .value("hinge", LossFamily::Hinge)
        .value("sqhinge", LossFamily::SquaredHinge)
        .value("huber", LossFamily::Huber);
    py::enum_<NormRegime>(m, "NormRegime")
        .value("L2Tighter", NormRegime::L2Tighter)
        .value("L1Tighter", NormRegime::L1Tighter)
        .value("Mixed", NormRegime::Mixed);

    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("name", &BoundReport::name)
        .def_readonly("value", &BoundReport::value)
        .def_readonly("witness_u", &BoundReport::witness_u)
        .def_readonly("witness_scale", &BoundReport::witness_scale)
        .def_readonly("mistake_count", &BoundReport::mistake_count)
        .def_readonly("valid", &BoundReport::valid)
        .def_readonly("kernelized", &BoundReport::kernelized)
        .def("__repr__", [](const BoundReport& r) {
            return "BoundReport(" + std::string(to_string(r.name)) + ", value=" + std::to_string(r.value) +
                   ", M_T=" + std::to_string(r.mistake_count) + ", valid=" + (r.valid ? "True" : "False") + ")";
        });

    py::class_<NormComparison>(m, "NormComparison")
        .def_readonly("l1", &NormComparison::l1)
        .def_readonly("l2_squared", &NormComparison::l2_squared)
        .def_readonly("regime", &NormComparison::regime);

    m.def("novikoff_bound", [](const RunTrace& t, const Stream& s, const Vector& v, double rho) {
        return novikoff_bound(t, s, v, rho);
    }, py::arg("trace"), py::arg("stream"), py::arg("v"), py::arg("rho"));
    m.def("l1_bound", [](const RunTrace& t, const Stream& s, const AdmissibleLoss& l, const Vector& u, L1Form f) {
        return l1_bound(t, s, l, u, f);
    }, py::arg("trace"), py::arg("stream"), py::arg("loss"), py::arg("u"), py::arg("form") = L1Form::General);
    m.def("hinge_l1_bound", [](const RunTrace& t, const Stream& s, double rho, const Vector& u, L1Form f) {
        return hinge_l1_bound(t, s, rho, u, f);
    }, py::arg("trace"), py::arg("stream"), py::arg("rho"), py::arg("u"), py::arg("form") = L1Form::General);
    m.def("sq_hinge_l1_bound", [](const RunTrace& t, const Stream& s, double rho, const Vector& u, L1Form f) {
        return sq_hinge_l1_bound(t, s, rho, u, f);
    }, py::arg("trace"), py::arg("stream"), py::arg("rho"), py::arg("u"), py::arg("form") = L1Form::General);
    m.def("l2_bound", [](const RunTrace& t, const Stream& s, double rho, const Vector& u, L2Form f) {
        return l2_bound(t, s, rho, u, f);
    }, py::arg("trace"), py::arg("stream"), py::arg("rho"), py::arg("u"), py::arg("form") = L2Form::First);
    m.def("evaluate_bound", [](BoundName n, const RunTrace& t, const Stream& s, LossFamily f, double rho,
                               const Vector& u) { return evaluate_bound(n, t, s, f, rho, u); },
          py::arg("name"), py::arg("trace"), py::arg("stream"), py::arg("family"), py::arg("rho"), py::arg("u"));
    m.def("compare_norms", [](const RunTrace& t, const Stream& s, double rho, const Vector& u) {
        return compare_norms(t, s, rho, u);
    }, py::arg("trace"), py::arg("stream"), py::arg("rho"), py::arg("u"));
    m.def("evaluate_kernel_bound", [](BoundName n, const KernelRunTrace& t, const Stream& s, LossFamily f, double rho,
                                      const Vector& beta) { return evaluate_kernel_bound(n, t, s, f, rho, beta); },
          py::arg("name"), py::arg("trace"), py::arg("stream"), py::arg("family"), py::arg("rho"), py::arg("beta"));

    py::class_<OptimizerOptions>(m, "OptimizerOptions")
        .def(py::init<>())
        .def_readwrite("rho_grid", &OptimizerOptions::rho_grid)
        .def_readwrite("iters", &OptimizerOptions::iters)
        .def_readwrite("seed", &OptimizerOptions::seed);

    m.def("default_rho_grid", &default_rho_grid, py::arg("radius"), py::arg("count") = 25);
    m.def("optimize_bound", [](const RunTrace& t, const Stream& s, BoundName n, LossFamily f,
                               const OptimizerOptions& o) { return optimize_bound(t, s, n, f, o); },
          py::arg("trace"), py::arg("stream"), py::arg("name"), py::arg("family") = LossFamily::Hinge,
          py::arg("options") = OptimizerOptions{});
    m.def("optimize_kernel_bound", [](const KernelRunTrace& t, const Stream& s, BoundName n, LossFamily f,
                                      const OptimizerOptions& o) { return optimize_kernel_bound(t, s, n, f, o); },
          py::arg("trace"), py::arg("stream"), py::arg("name"), py::arg("family") = LossFamily::Hinge,
          py::arg("options") = OptimizerOptions{});

    // -- data ---------------------------------------------------------------
    py::class_<GeneratorSpec> gs(m, "GeneratorSpec");
    py::enum_<GeneratorSpec::Kind>(gs, "Kind")
        .value("SeparableMargin", GeneratorSpec::Kind::SeparableMargin)
        .value("LabelNoise", GeneratorSpec::Kind::LabelNoise)
        .value("Contradictory", GeneratorSpec::Kind::Contradictory);
    gs.def(py::init<>())
        .def_readwrite("kind", &GeneratorSpec::kind)
        .def_readwrite("dim", &GeneratorSpec::dim)
        .def_readwrite("count", &GeneratorSpec::count)
        .def_readwrite("radius", &GeneratorSpec::radius)
        .def_readwrite("margin", &GeneratorSpec::margin)
        .def_readwrite("flip_prob", &GeneratorSpec::flip_prob)
        .def_readwrite("seed", &GeneratorSpec::seed)
        .def("validate", &GeneratorSpec::validate)
        .def("__str__", [](const GeneratorSpec& g) { return to_string(g); });

    py::class_<GeneratedData>(m, "GeneratedData")
        .def_readonly("stream", &GeneratedData::stream)
        .def_readonly("planted", &GeneratedData::planted);

    m.def("parse_generator_spec", &parse_generator_spec, py::arg("text"));
    m.def("generate", &generate, py::arg("spec"));

    py::enum_<FileFormat>(m, "FileFormat")
        .value("CSV", FileFormat::CSV)
        .value("SparseIndexValue", FileFormat::SparseIndexValue);

    m.def("parse_stream", &parse_stream, py::arg("text"), py::arg("format") = FileFormat::CSV);
    m.def("format_stream", [](const Stream& s, FileFormat f) { return format_stream(s, f); }, py::arg("stream"),
          py::arg("format") = FileFormat::CSV);
    m.def("load", &load, py::arg("path"), py::arg("format") = FileFormat::CSV);
    m.def("save", [](const Stream& s, const std::filesystem::path& p, FileFormat f) { save(s, p, f); },
          py::arg("stream"), py::arg("path"), py::arg("format") = FileFormat::CSV);
    m.def("stream_digest", [](const Stream& s) { return stream_digest(s); });

    // -- online to batch ----------------------------------------------------
    py::class_<BoundedLoss>(m, "BoundedLoss")
        .def(py::init([](std::string name, std::function<double(double)> fn) {
            return BoundedLoss{std::move(name), std::move(fn)};
        }), py::arg("name"), py::arg("fn"))
        .def_readonly("name", &BoundedLoss::name)
        .def("__call__", [](const BoundedLoss& l, double m) { return l.eval(m); })
        .def_static("zero_one", &BoundedLoss::zero_one)
        .def_static("clipped_hinge", &BoundedLoss::clipped_hinge, py::arg("rho"));

    py::class_<SelectionResult>(m, "SelectionResult")
        .def_readonly("chosen_index", &SelectionResult::chosen_index)
        .def_readonly("suffix_risk", &SelectionResult::suffix_risk)
        .def_readonly("penalty", &SelectionResult::penalty)
        .def_readonly("objective_per_index", &SelectionResult::objective_per_index);

    py::class_<GeneralizationReport>(m, "GeneralizationReport")
        .def_readonly("bound_name", &GeneralizationReport::bound_name)
        .def_readonly("rhs", &GeneralizationReport::rhs)
        .def_readonly("empirical_online_loss", &GeneralizationReport::empirical_online_loss)
        .def_readonly("confidence_term", &GeneralizationReport::confidence_term);

    py::enum_<GeneralizationKind>(m, "GeneralizationKind")
        .value("L1Gen", GeneralizationKind::L1Gen)
        .value("L2Gen", GeneralizationKind::L2Gen);

    py::class_<TrialOutcome>(m, "TrialOutcome")
        .def_readonly("rhs", &TrialOutcome::rhs)
        .def_readonly("test_error", &TrialOutcome::test_error)
        .def_readonly("chosen_index", &TrialOutcome::chosen_index)
        .def_readonly("mistakes", &TrialOutcome::mistakes)
        .def_readonly("violated", &TrialOutcome::violated);

    py::class_<CoverageResult>(m, "CoverageResult")
        .def_readonly("violation_fraction", &CoverageResult::violation_fraction)
        .def_readonly("violations", &CoverageResult::violations)
        .def_readonly("trials", &CoverageResult::trials);

    m.def("selection_penalty", &selection_penalty, py::arg("rounds"), py::arg("suffix_len"), py::arg("delta"));
    m.def("select_from_losses", &select_from_losses, py::arg("losses"), py::arg("delta"));
    m.def("select_penalized", [](const RunTrace& t, const Stream& s, const BoundedLoss& l, double d) {
        return select_penalized(t, s, l, d);
    }, py::arg("trace"), py::arg("stream"), py::arg("loss"), py::arg("delta"));
    m.def("confidence_term", &confidence_term, py::arg("rounds"), py::arg("delta"));
    m.def("cbcg_rhs", [](const RunTrace& t, const Stream& s, const BoundedLoss& l, double d) {
        return cbcg_rhs(t, s, l, d);
    }, py::arg("trace"), py::arg("stream"), py::arg("loss"), py::arg("delta"));
    m.def("generalization_bound_rhs", [](const RunTrace& t, const Stream& s, GeneralizationKind k,
                                         const AdmissibleLoss& l, const Vector& u, double d) {
        return generalization_bound_rhs(t, s, k, l, u, d);
    }, py::arg("trace"), py::arg("stream"), py::arg("kind"), py::arg("loss"), py::arg("u"), py::arg("delta"));
    m.def("coverage_experiment", &coverage_experiment, py::arg("generator"), py::arg("rounds"), py::arg("delta"),
          py::arg("trials"), py::arg("test_size"), py::arg("seed") = 0);
}
