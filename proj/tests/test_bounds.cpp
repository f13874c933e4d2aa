#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "pmb/bounds.hpp"

using namespace pmb;
using fixtures::contradictory_1d;
using fixtures::separable_1d;
using fixtures::two_d;

namespace {

// Hand evaluations of the worked bound examples, written out term by term.
struct Hand {
    // contradictory stream, u = 1, rho = 1: losses [0, 2, 0, 2], R = 2, r = 1
    static constexpr double l1 = 4.0;
    static double l2() { return std::sqrt(8.0); }
    static constexpr double R = 2.0;
    static double l1_general() { return l1 + R / 1.0; }
    static double l2_first() {
        const double a = l2() / 2.0 + std::sqrt(l2() * l2() / 4.0 + R / 1.0);
        return a * a;
    }
    static double l2_radius() { return (1.0 / 1.0 + l2()) * (1.0 / 1.0 + l2()); }
};

}  // namespace

TEST_CASE("hand values agree with the frozen constants") {
    CHECK(Hand::l1_general() == 6.0);
    CHECK(Hand::l2_first() == doctest::Approx(11.656854249492380).epsilon(1e-12));
    CHECK(Hand::l2_radius() == doctest::Approx(14.656854249492380).epsilon(1e-12));
}

TEST_CASE("novikoff") {
    SUBCASE("1-D stream is tight") {
        const auto s = separable_1d();
        const auto rep = novikoff_bound(run_primal(s), s, Vector{1.0}, 2.0);
        CHECK(rep.value == 1.0);
        CHECK(rep.mistake_count == 1);
        CHECK(rep.valid);
    }
    SUBCASE("2-D stream") {
        const auto s = two_d();
        const double k = 1.0 / std::sqrt(5.0);
        const auto rep = novikoff_bound(run_primal(s), s, Vector{k, 2 * k}, k);
        CHECK(rep.value == doctest::Approx(5.0));
        CHECK(rep.mistake_count == 2);
        CHECK(rep.valid);
    }
    SUBCASE("margin above the separator's margin is infeasible") {
        const auto s = two_d();
        const double k = 1.0 / std::sqrt(5.0);
        CHECK_THROWS_AS(novikoff_bound(run_primal(s), s, Vector{k, 2 * k}, 0.5), InfeasibleWitness);
        CHECK_THROWS_AS(novikoff_bound(run_primal(s), s, Vector{0.0, 0.0}, 0.1), InfeasibleWitness);
        try {
            novikoff_bound(run_primal(s), s, Vector{1.0, 0.0}, 0.1);
            FAIL("expected infeasible witness");
        } catch (const InfeasibleWitness& e) {
            CHECK(std::string(e.what()).find("round 2") != std::string::npos);
        }
    }
}

TEST_CASE("l1 bounds") {
    SUBCASE("hinge on the 1-D stream is tight") {
        const auto s = separable_1d();
        const auto tr = run_primal(s);
        const auto rep = hinge_l1_bound(tr, s, 2.0, Vector{1.0}, L1Form::General);
        CHECK(rep.value == 1.0);
        CHECK(rep.valid);
        CHECK(to_string(rep.name) == "l1_hinge");
        // same number through the general l1 bound with the hinge loss
        CHECK(l1_bound(tr, s, make_hinge(2.0), Vector{1.0}, L1Form::General).value == 1.0);
        CHECK(hinge_l1_bound(tr, s, 2.0, Vector{1.0}, L1Form::RadiusForm).value == 1.0);
    }
    SUBCASE("contradictory stream") {
        const auto s = contradictory_1d();
        const auto tr = run_primal(s);
        const auto rep = l1_bound(tr, s, make_hinge(1.0), Vector{1.0}, L1Form::General);
        CHECK(rep.value == Hand::l1_general());
        CHECK(rep.mistake_count == 4);
        CHECK(rep.valid);
        CHECK(to_string(rep.name) == "l1_general");
        // (r/rho + sqrt(4))^2 = 9
        CHECK(l1_bound(tr, s, make_hinge(1.0), Vector{1.0}, L1Form::RadiusForm).value == 9.0);
    }
    SUBCASE("squared hinge on the 1-D stream") {
        // losses [0]; gamma = 2 (rho + r) / rho^2 = 2 at rho = r = 2; R = 2
        const auto s = separable_1d();
        const auto tr = run_primal(s);
        const auto rep = sq_hinge_l1_bound(tr, s, 2.0, Vector{1.0}, L1Form::General);
        CHECK(rep.value == doctest::Approx(0.0 + 2.0 * 2.0));
        CHECK(rep.valid);
        const auto rad = sq_hinge_l1_bound(tr, s, 2.0, Vector{1.0}, L1Form::RadiusForm);
        CHECK(rad.value == doctest::Approx(std::pow(2.0 * 2.0 + 0.0, 2)));
    }
    SUBCASE("huber through the general l1 bound") {
        const auto s = contradictory_1d();
        const auto tr = run_primal(s);
        const auto h = make_huber(1.0, 1.0);
        // margins [1, -1, 1, -1] -> H(0)=0, H(2)=1.5; phi0 = 0.5, gamma = 1, R = 2
        const auto rep = l1_bound(tr, s, h, Vector{1.0}, L1Form::General);
        CHECK(rep.value == doctest::Approx(3.0 / 0.5 + 1.0 / 0.5 * 2.0));
        CHECK(rep.valid);
    }
    SUBCASE("rejections") {
        const auto s = contradictory_1d();
        const auto tr = run_primal(s);
        CHECK_THROWS_AS(l1_bound(tr, s, make_hinge(1.0), Vector{1.5}, L1Form::General), InfeasibleWitness);
        const auto signed_loss = AdmissibleLoss::custom("signed", 1.0, [](double x) { return 1.0 + x; });
        CHECK_THROWS_AS(l1_bound(tr, s, signed_loss, Vector{1.0}, L1Form::General), PreconditionError);
        // squared hinge declared on a smaller ball than the data
        CHECK_THROWS_AS(l1_bound(tr, s, make_squared_hinge(1.0, 0.5), Vector{1.0}, L1Form::General),
                        PreconditionError);
        PerceptronConfig cfg;
        cfg.eta = 2.0;
        CHECK_THROWS_AS(l1_bound(run_primal(s, cfg), s, make_hinge(1.0), Vector{1.0}, L1Form::General),
                        PreconditionError);
        cfg = {};
        cfg.update_rule = UpdateRule::StrictSignMismatch;
        CHECK_THROWS_AS(hinge_l1_bound(run_primal(s, cfg), s, 1.0, Vector{1.0}, L1Form::General), PreconditionError);
    }
}

TEST_CASE("the 2r/rho^2 constant gives an unsound squared-hinge bound") {
    // 1-D stream, u = 1, rho = 100, r = 2: loss (1 - 2/100)^2, gamma 2r/rho^2
    const auto s = separable_1d();
    const auto tr = run_primal(s);
    const double rho = 100.0, r = 2.0;
    const auto nominal = make_squared_hinge(rho, r).with_gamma(2.0 * r / (rho * rho));
    const double loss = (1.0 - 2.0 / rho) * (1.0 - 2.0 / rho);
    const double value = loss + 2.0 * r / (rho * rho) * 2.0;
    CHECK(value == doctest::Approx(0.9612));
    CHECK(value < 1.0);
    CHECK_FALSE(check_admissibility(nominal, {-r, r}).lipschitz.pass);
    // the corrected constant restores soundness at the same witness
    CHECK(sq_hinge_l1_bound(tr, s, rho, Vector{1.0}, L1Form::General).valid);
}

TEST_CASE("l2 bounds") {
    SUBCASE("1-D stream") {
        const auto s = separable_1d();
        const auto rep = l2_bound(run_primal(s), s, 2.0, Vector{1.0}, L2Form::First);
        CHECK(rep.value == 1.0);
        CHECK(rep.valid);
    }
    SUBCASE("contradictory stream") {
        const auto s = contradictory_1d();
        const auto tr = run_primal(s);
        const auto first = l2_bound(tr, s, 1.0, Vector{1.0}, L2Form::First);
        CHECK(first.value == doctest::Approx(Hand::l2_first()).epsilon(1e-12));
        CHECK(first.value == doctest::Approx(11.657).epsilon(1e-4));
        const auto rad = l2_bound(tr, s, 1.0, Vector{1.0}, L2Form::RadiusForm);
        CHECK(rad.value == doctest::Approx(Hand::l2_radius()).epsilon(1e-12));
        CHECK(rad.value == doctest::Approx(14.657).epsilon(1e-4));
        CHECK(first.valid);
        CHECK(rad.valid);
    }
}

TEST_CASE("compare_norms") {
    SUBCASE("zero losses") {
        const auto s = separable_1d();
        const auto c = compare_norms(run_primal(s), s, 2.0, Vector{1.0});
        CHECK(c.l1 == 0.0);
        CHECK(c.l2_squared == 0.0);
        CHECK(c.regime == NormRegime::L2Tighter);
    }
    SUBCASE("contradictory stream") {
        const auto s = contradictory_1d();
        const auto c = compare_norms(run_primal(s), s, 1.0, Vector{1.0});
        CHECK(c.l1 == 4.0);
        CHECK(c.l2_squared == doctest::Approx(8.0));
        CHECK(c.regime == NormRegime::L1Tighter);  // every non-zero loss is 2
    }
    SUBCASE("regime classification") {
        CHECK(classify_regime(std::vector<double>{0.5, 0.5}) == NormRegime::L2Tighter);
        CHECK(classify_regime(std::vector<double>{2.0, 2.0}) == NormRegime::L1Tighter);
        CHECK(classify_regime(std::vector<double>{0.5, 2.0}) == NormRegime::Mixed);
        CHECK(classify_regime(std::vector<double>{0.0, 2.0}) == NormRegime::L1Tighter);
        CHECK(classify_regime(std::vector<double>{0.0, 0.0}) == NormRegime::L2Tighter);
        const auto v = LossVector::from_values({0.5, 0.5});
        CHECK(v.l1 == 1.0);
        CHECK(v.l2 * v.l2 == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("all losses >= 1 with a non-positive witness") {
        // u = -1 on the 1-D stream: margin -2 on the single update, hinge 3
        const auto s = separable_1d();
        const auto c = compare_norms(run_primal(s), s, 1.0, Vector{-1.0});
        CHECK(c.l1 == 3.0);
        CHECK(c.l2_squared == 9.0);
        CHECK(c.regime == NormRegime::L1Tighter);
    }
}

TEST_CASE("rho to infinity drives the hinge bound to |I|") {
    pmb::Rng rng(77);
    const auto s = fixtures::random_stream(rng, 3, 100, 1);
    const auto tr = run_primal(s);
    const Vector u = rng.unit_sphere(3);
    const auto rep = hinge_l1_bound(tr, s, 1e6 * tr.radius, u, L1Form::General);
    CHECK(rep.value == doctest::Approx(static_cast<double>(tr.mistake_count)).epsilon(0.01));
}

TEST_CASE("optimizer") {
    SUBCASE("1-D hinge optimum sits on the boundary") {
        const auto s = separable_1d();
        const auto tr = run_primal(s);
        OptimizerOptions opt;
        opt.rho_grid = {2.0};
        const auto rep = optimize_bound(tr, s, BoundName::L1Hinge, LossFamily::Hinge, opt);
        CHECK(rep.value == doctest::Approx(1.0));
        CHECK(rep.witness_u[0] == doctest::Approx(1.0));
        CHECK(rep.witness_scale == 2.0);
    }
    SUBCASE("single iteration is still a valid bound") {
        pmb::Rng rng(8);
        for (int rep = 0; rep < 20; ++rep) {
            const auto s = fixtures::random_stream(rng, 4, 50, rep % 3);
            const auto tr = run_primal(s);
            OptimizerOptions opt;
            opt.iters = 1;
            opt.seed = rep;
            for (BoundName n : {BoundName::L1Hinge, BoundName::L2First, BoundName::L1SqHingeRadius,
                                BoundName::L1General}) {
                const auto r = optimize_bound(tr, s, n, LossFamily::Huber, opt);
                CHECK(r.valid);
                CHECK(norm(r.witness_u) <= 1.0 + 1e-9);
            }
        }
    }
    SUBCASE("never worse than the normalized final weights") {
        pmb::Rng rng(9);
        for (int rep = 0; rep < 20; ++rep) {
            const auto s = fixtures::random_stream(rng, 3, 80, rep % 3);
            const auto tr = run_primal(s);
            Vector warm = tr.final_weights;
            const double n = std::max(1.0, norm(warm));
            for (double& c : warm) c /= n;
            for (double rho : {0.1, 1.0, 10.0}) {
                OptimizerOptions opt;
                opt.rho_grid = {rho};
                opt.iters = 30;
                for (BoundName name : {BoundName::L1Hinge, BoundName::L2Radius}) {
                    const auto best = optimize_bound(tr, s, name, LossFamily::Hinge, opt);
                    const auto at_warm = evaluate_bound(name, tr, s, LossFamily::Hinge, rho, warm);
                    CHECK(best.value <= at_warm.value);
                }
            }
        }
    }
    SUBCASE("novikoff through the optimizer") {
        const auto s = two_d();
        const auto rep = optimize_bound(run_primal(s), s, BoundName::Novikoff, LossFamily::Hinge, {});
        CHECK(rep.valid);
        // best separator of these three points has margin 1/sqrt(2)
        CHECK(rep.value >= 2.0 - 1e-9);
        CHECK(rep.value <= 5.0);
        const auto c = contradictory_1d();
        CHECK_THROWS_AS(optimize_bound(run_primal(c), c, BoundName::Novikoff, LossFamily::Hinge, {}),
                        InfeasibleWitness);
    }
    SUBCASE("argument errors") {
        const auto s = two_d();
        OptimizerOptions opt;
        opt.rho_grid = {-1.0};
        CHECK_THROWS_AS(optimize_bound(run_primal(s), s, BoundName::L1Hinge, LossFamily::Hinge, opt), ParameterError);
        opt.rho_grid = {1.0};
        opt.iters = 0;
        CHECK_THROWS_AS(optimize_bound(run_primal(s), s, BoundName::L1Hinge, LossFamily::Hinge, opt), ParameterError);
    }
    SUBCASE("deterministic for a fixed seed") {
        pmb::Rng rng(10);
        const auto s = fixtures::random_stream(rng, 5, 100, 1);
        const auto tr = run_primal(s);
        OptimizerOptions opt;
        opt.seed = 42;
        opt.iters = 50;
        const auto a = optimize_bound(tr, s, BoundName::L2First, LossFamily::Hinge, opt);
        const auto b = optimize_bound(tr, s, BoundName::L2First, LossFamily::Hinge, opt);
        CHECK(a.value == b.value);
        CHECK(a.witness_u == b.witness_u);
    }
}

TEST_CASE("default rho grid") {
    const auto g = default_rho_grid(2.0);
    REQUIRE(g.size() == 25);
    CHECK(g.front() == doctest::Approx(0.02));
    CHECK(g.back() == doctest::Approx(200.0));
    CHECK(g[12] == doctest::Approx(2.0));
}

TEST_CASE("bound names round-trip") {
    for (BoundName n : kAllBounds) CHECK(parse_bound_name(to_string(n)) == n);
    CHECK_FALSE(parse_bound_name("nope").has_value());
}

TEST_CASE("soundness over random witnesses") {
    pmb::Rng rng(123);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng.next() % 5;
        const auto s = fixtures::random_stream(rng, n, 1 + rng.next() % 100, rep % 3);
        const auto tr = run_primal(s);
        for (int w = 0; w < 10; ++w) {
            const Vector u = rng.unit_sphere(n);
            const double rho = std::max(tr.radius, 1e-9) * std::pow(10.0, -2.0 + 4.0 * rng.uniform());
            for (BoundName name : kAllBounds) {
                if (name == BoundName::Novikoff) continue;
                for (LossFamily f : {LossFamily::Hinge, LossFamily::SquaredHinge, LossFamily::Huber}) {
                    const auto r = evaluate_bound(name, tr, s, f, rho, u);
                    CHECK_MESSAGE(r.valid, to_string(name), " rho=", rho, " value=", r.value, " M=", r.mistake_count);
                }
            }
        }
    }
}

TEST_CASE("kernel bounds") {
    SUBCASE("linear kernel agrees with the primal bound") {
        pmb::Rng rng(31);
        const auto s = fixtures::random_stream(rng, 3, 60, 1);
        const auto tr = run_primal(s);
        const auto kt = run_kernel(s, KernelSpec::linear());
        REQUIRE(kt.update_rounds == tr.update_rounds);

        // beta over update rounds -> u = sum beta_s x_s
        Vector beta(kt.update_rounds.size());
        for (double& b : beta) b = rng.normal();
        Vector u(3, 0.0);
        for (std::size_t k = 0; k < beta.size(); ++k) axpy(beta[k], s[kt.update_rounds[k]].features, u);
        const double un = norm(u);
        for (double& b : beta) b /= un;
        for (double& c : u) c /= un;
        CHECK(kernel_witness_norm(kt, s, beta) == doctest::Approx(1.0));

        for (BoundName name : {BoundName::L1Hinge, BoundName::L1HingeRadius, BoundName::L2First, BoundName::L2Radius,
                               BoundName::L1General, BoundName::L1SqHinge}) {
            const auto kp = evaluate_kernel_bound(name, kt, s, LossFamily::Hinge, 0.7, beta);
            const auto pp = evaluate_bound(name, tr, s, LossFamily::Hinge, 0.7, u);
            CHECK(kp.value == doctest::Approx(pp.value).epsilon(1e-9));
            CHECK(kp.kernelized);
        }
    }
    SUBCASE("rbf optimized bounds are valid") {
        pmb::Rng rng(32);
        const auto s = fixtures::random_stream(rng, 2, 80, 1);
        const auto kt = run_kernel(s, KernelSpec::rbf(0.5));
        OptimizerOptions opt;
        opt.iters = 40;
        for (BoundName name : {BoundName::L1Hinge, BoundName::L2First, BoundName::L1SqHinge, BoundName::L2Radius}) {
            const auto r = optimize_kernel_bound(kt, s, name, LossFamily::Hinge, opt);
            CHECK(r.valid);
            CHECK(kernel_witness_norm(kt, s, r.witness_u) <= 1.0 + 1e-9);
        }
    }
    SUBCASE("infeasible dual witness") {
        const auto s = two_d();
        const auto kt = run_kernel(s, KernelSpec::linear());
        CHECK_THROWS_AS(evaluate_kernel_bound(BoundName::L1Hinge, kt, s, LossFamily::Hinge, 1.0, Vector{3.0, 3.0}),
                        InfeasibleWitness);
        CHECK_THROWS_AS(evaluate_kernel_bound(BoundName::L1Hinge, kt, s, LossFamily::Hinge, 1.0, Vector{1.0}),
                        InvalidInput);
    }
}
