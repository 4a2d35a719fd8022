#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rrproc/law.hpp"
#include "suite_laws.hpp"

using namespace rrproc;

TEST_CASE("validate: symmetric two-point law is standardized") {
    MomentReport r = validate(suite::rademacher());
    CHECK(r.mean_tau == 1.0);
    CHECK(r.mean_x == 0.0);
    CHECK(r.var_x == 1.0);
    CHECK(r.standardized);
    CHECK(r.condition_flags.sq_exp_moment);
    CHECK(r.condition_flags.all_lambda_moment);
}

TEST_CASE("validate: degenerate reward is not standardized") {
    JointLaw law = JointLaw::discrete({{Rational(1), 0.0, 1.0}});
    MomentReport r = validate(law);
    CHECK(r.var_x == 0.0);
    CHECK_FALSE(r.standardized);
}

TEST_CASE("validate: rescaled {1,4} law with centered scaled sqrt rewards") {
    // exact rational oracle over the two atoms:
    //   E tau = (2/5 + 8/5)/2 = 1, E X = 0, E X^2 = 1
    MomentReport r = validate(suite::sqrt_skew());
    CHECK(r.mean_tau == 1.0);
    CHECK(r.mean_x == 0.0);
    CHECK(r.var_x == 1.0);
    CHECK(r.standardized);
}

TEST_CASE("validate: structural errors") {
    CHECK_THROWS_WITH_AS(JointLaw::discrete({{Rational(0), 1.0, 1.0}}), "non-positive tau atom",
                         std::invalid_argument);
    CHECK_THROWS_AS(JointLaw::discrete({{Rational(-1, 2), 1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(JointLaw::discrete({{Rational(1), 1.0, 0.6}, {Rational(1), -1.0, 0.6}}),
                    std::invalid_argument);
}

TEST_CASE("standardize: identity on an already standardized law") {
    JointLaw law = suite::rademacher();
    JointLaw out = standardize(law);
    REQUIRE(out.atoms().size() == law.atoms().size());
    for (size_t i = 0; i < out.atoms().size(); ++i) {
        CHECK(out.atoms()[i].tau == law.atoms()[i].tau);
        CHECK(out.atoms()[i].x == law.atoms()[i].x);
        CHECK(out.atoms()[i].p == law.atoms()[i].p);
    }
}

TEST_CASE("standardize: tau==2 with X=+-2 maps to tau==1 with X=+-1") {
    JointLaw law = JointLaw::discrete({{Rational(2), 2.0, 0.5}, {Rational(2), -2.0, 0.5}});
    JointLaw out = standardize(law);
    // oracle: recompute the moments of the output
    MomentReport r = validate(out);
    CHECK(r.standardized);
    CHECK(out.atoms()[0].tau == Rational(1));
    CHECK(out.atoms()[0].x == 1.0);
    CHECK(out.atoms()[1].x == -1.0);
}

TEST_CASE("standardize: tau in {1,4} with X = sqrt(tau)") {
    JointLaw law = JointLaw::discrete({{Rational(1), 1.0, 0.5}, {Rational(4), 2.0, 0.5}});
    JointLaw out = standardize(law);
    MomentReport r = validate(out);
    CHECK(r.standardized);
    CHECK(std::fabs(r.mean_x) <= 1e-12);
    CHECK(std::fabs(r.var_x - 1.0) <= 1e-12);
    CHECK(std::fabs(r.mean_tau - 1.0) <= 1e-12);
    // sigma = 1/2 is exactly rational, so the map is exact: {2/5, 8/5}, X = -+1
    CHECK(out.atoms()[0].tau == Rational(2, 5));
    CHECK(out.atoms()[1].tau == Rational(8, 5));
    CHECK(out.atoms()[0].x == -1.0);
    CHECK(out.atoms()[1].x == 1.0);
}

TEST_CASE("standardize: rejects zero reward variance") {
    JointLaw law = JointLaw::discrete({{Rational(1), 0.0, 1.0}});
    CHECK_THROWS_AS(standardize(law), std::invalid_argument);
}

TEST_CASE("standardize of a continuous scaled-sqrt law") {
    JointLaw out = suite::scaled_sqrt_exp_std();
    MomentReport r = validate(out);
    CHECK(std::fabs(r.mean_tau - 1.0) <= 1e-12);
    CHECK(std::fabs(r.mean_x) <= 1e-12);
    CHECK(std::fabs(r.var_x - 1.0) <= 1e-12);
    CHECK(r.standardized);
}

TEST_CASE("span: gcd of the tau support") {
    CHECK(span(suite::uniform12_pm1()) == Rational(1));
    JointLaw halves =
        JointLaw::discrete({{Rational(1, 2), 1.0, 0.5}, {Rational(3, 2), -1.0, 0.5}});
    CHECK(span(halves) == Rational(1, 2));  // oracle: rational gcd
    JointLaw evens = JointLaw::discrete({{Rational(2), 1.0, 0.5},
                                         {Rational(4), -0.5, 0.25},
                                         {Rational(6), -0.5, 0.25}});
    CHECK(span(evens) == Rational(2));  // the maximal delta, not 1
    CHECK(span(suite::scaled_sqrt_exp_std()) == Rational(0));
}

TEST_CASE("span scales inversely with the tau rescaling of standardize") {
    JointLaw law = suite::uniform12_pm1();  // span 1, E tau = 3/2
    CHECK(span(standardize(law)) == span(law) / Rational(3, 2));
}

TEST_CASE("moments agree with brute-force rational sums") {
    // law with awkward rationals; oracle sums evaluated by hand:
    //   E tau = 1/4*1/3 + 3/4*7/5 = 1/12 + 21/20 = 17/15
    JointLaw law =
        JointLaw::discrete({{Rational(1, 3), 1.5, 0.25}, {Rational(7, 5), -0.5, 0.75}});
    MomentReport r = validate(law);
    CHECK(r.mean_tau == to_double(Rational(17, 15)));
    CHECK(r.mean_x == 0.25 * 1.5 + 0.75 * -0.5);  // exact dyadic arithmetic
    CHECK(r.var_x == doctest::Approx(0.25 * 2.25 + 0.75 * 0.25 - 0.0).epsilon(1e-15));
}

TEST_CASE("standardize lands on the target moments for random laws") {
    PhiloxRng rng(1414, 0);
    for (int trial = 0; trial < 30; ++trial) {
        int n_atoms = 2 + static_cast<int>(rng() % 4);
        std::vector<Atom> atoms;
        double acc = 0.0;
        for (int i = 0; i < n_atoms; ++i) {
            Rational tau(1 + static_cast<int>(rng() % 9), 1 + static_cast<int>(rng() % 5));
            double p = i + 1 == n_atoms ? 1.0 - acc : (1.0 - acc) * (0.2 + 0.5 * rng.uniform01());
            acc += p;
            atoms.push_back({tau, 6.0 * rng.uniform01() - 3.0, p});
        }
        // degenerate rewards happen with probability zero here
        JointLaw law = JointLaw::discrete(atoms);
        MomentReport r = validate(standardize(law));
        CAPTURE(trial);
        CHECK(std::fabs(r.mean_tau - 1.0) <= 1e-12);
        CHECK(std::fabs(r.mean_x) <= 1e-12);
        CHECK(std::fabs(r.var_x + r.mean_x * r.mean_x - 1.0) <= 1e-12);
        CHECK(r.standardized);
    }
}

TEST_CASE("sample_pair: deterministic tau and exact seed reproducibility") {
    JointLaw law = suite::rademacher();
    PhiloxRng rng(11, 0);
    for (int i = 0; i < 100; ++i) {
        auto [tau, x] = sample_pair(law, rng);
        CHECK(tau == 1.0);
        CHECK((x == 1.0 || x == -1.0));
    }
    PhiloxRng r1(5, 3), r2(5, 3);
    for (int i = 0; i < 100; ++i) {
        auto a = sample_pair(law, r1);
        auto b = sample_pair(law, r2);
        CHECK(a == b);
    }
}

TEST_CASE("sample_pair: empirical reward mean within 4 sigma") {
    JointLaw law = suite::uniform12_pm1();
    PhiloxRng rng(2024, 0);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_pair(law, rng).second;
    // oracle: E X = 0, sd(X) = 1
    CHECK(std::fabs(sum / n) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("sample_pair: Kolmogorov distance of the tau marginal") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        JointLaw law = suite::lattice_third();
        PhiloxRng rng(seed, 0);
        const int n = 100000;
        std::vector<double> taus(n);
        for (int i = 0; i < n; ++i) taus[i] = sample_pair(law, rng).first;
        // exact CDF of the tau marginal
        std::vector<std::pair<double, double>> cdf = {
            {1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.75}, {1.0, 1.0}};
        CHECK(oracles::kolmogorov_distance(taus, cdf) <= 0.01);
    }
}

TEST_CASE("law JSON: the discrete schema round-trips") {
    std::string text = R"({"kind":"discrete","atoms":[
        {"tau":"3/2","x":-1.0,"p":0.5},
        {"tau":"1/2","x":1.0,"p":0.5}]})";
    JointLaw law = law_from_json_text(text);
    REQUIRE(law.atoms().size() == 2);
    CHECK(law.atoms()[0].tau == Rational(3, 2));
    CHECK(law.atoms()[1].tau == Rational(1, 2));
    JointLaw again = law_from_json_text(law_to_json_text(law));
    CHECK(again.atoms()[0].tau == law.atoms()[0].tau);
    CHECK(again.atoms()[0].x == law.atoms()[0].x);
}

TEST_CASE("law JSON: parametric schema and errors") {
    std::string text = R"({"kind":"parametric","family":"scaled-sqrt",
        "params":{"tau_family":"exponential","rate":2.0,"a":1.5,"b":-0.5}})";
    JointLaw law = law_from_json_text(text);
    CHECK(law.kind() == LawKind::Parametric);
    CHECK(law.scaled_sqrt_params().rate == 2.0);

    CHECK_THROWS_AS(law_from_json_text(R"({"kind":"nope"})"), std::invalid_argument);
    CHECK_THROWS_AS(
        law_from_json_text(R"({"kind":"discrete","atoms":[{"tau":"x/y","x":0.0,"p":1.0}]})"),
        std::invalid_argument);
}

TEST_CASE("custom sampler laws carry their declared moments") {
    CustomSamplerLaw custom;
    custom.sample = [](PhiloxRng& rng) {
        double tau = 0.5 + rng.uniform01();
        return std::pair<double, double>{tau, rng.uniform01() < 0.5 ? 1.0 : -1.0};
    };
    custom.mean_tau = 1.0;
    custom.mean_x = 0.0;
    custom.var_x = 1.0;
    custom.sq_exp_moment = true;
    custom.all_lambda_moment = true;
    JointLaw law = JointLaw::custom(custom);
    MomentReport r = validate(law);
    CHECK(r.standardized);
    CHECK(span(law) == Rational(0));
}
