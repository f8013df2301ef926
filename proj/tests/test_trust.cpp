#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <platsim/scenarios.hpp>
#include <platsim/trust.hpp>

using namespace platsim;

TEST_CASE("trust audit separates the strategic and naive guarantees") {
    StylizedInstance inst = make_stylized(detail::s1_params());
    TrustReport r = trust_audit(inst.game);
    CHECK(std::abs(r.strategic_value - 0.7125) <= 1e-12);
    CHECK(std::abs(r.naive_value - 0.625) <= 1e-12);
    CHECK(std::abs(r.strategization_gap - 0.0875) <= 1e-12);
    CHECK(r.kappa == r.naive_value);
    // Strategizing strictly helps the user here, so no level is trustworthy.
    CHECK_FALSE(r.trustworthy);
    CHECK_FALSE(r.trustworthy_at(0.0));
    CHECK_FALSE(r.trustworthy_at(-1.0));
    CHECK(r.naive_stable.survivors == std::vector<int>{2});
    CHECK(r.strategic.best_id == 7);
}

TEST_CASE("a gap-free instance is trustworthy up to its naive guarantee") {
    StylizedParams p = detail::s1_params();
    p.liked = {0, 1};
    TrustReport r = trust_audit(make_stylized(p).game, CandidateSpec{}, 0.4);
    CHECK(r.strategization_gap == 0.0);
    CHECK(std::abs(r.kappa - 0.475) <= 1e-12);
    CHECK(r.trustworthy);
    CHECK(r.kappa0 == 0.4);
    CHECK(r.trustworthy_at(r.kappa));
    CHECK_FALSE(r.trustworthy_at(r.kappa + 1e-9));
}

TEST_CASE("vertex predictions are model-conditional expected payoffs") {
    StylizedInstance inst = make_stylized(detail::s1_params());
    const GameInstance& g = inst.game;
    for (int i = 0; i < 3; ++i) {
        Belief v = Belief::vertex(3, i);
        Distribution feed = g.algorithm->propose(g.models, v);
        double expect = platform_value(feed, g.models.models[static_cast<size_t>(i)],
                                       g.platform_payoff);
        CHECK(predicted_payoff(*g.algorithm, v, g.models, g.platform_payoff) ==
              doctest::Approx(expect).epsilon(1e-15));
    }
    // The everything model clicks 80% of whatever is shown.
    CHECK(predicted_payoff(*g.algorithm, Belief::vertex(3, 2), g.models, g.platform_payoff) ==
          doctest::Approx(0.8).epsilon(1e-12));
    CHECK_THROWS_AS(predicted_payoff(*g.algorithm, Belief::uniform(2), g.models, g.platform_payoff),
                    ValidationError);
}

TEST_CASE("auditing the current rule against itself isolates the model-fit error") {
    StylizedInstance inst = make_stylized(detail::s1_params());
    UserParams strategic;
    CounterfactualReport r =
        counterfactual_audit(inst.game, inst.game.algorithm, strategic);
    // Predictions respond with the surviving model (clicks A at 0.8), while the
    // committed user clicks its liked A items deterministically, so even the
    // self-audit carries the 0.76 vs 0.7125 model-fit discrepancy.
    CHECK(std::abs(r.predicted - 0.76) <= 1e-12);
    CHECK(std::abs(r.true_value - 0.7125) <= 1e-12);
    CHECK(std::abs(r.gap - 0.0475) <= 1e-12);
    CHECK(r.algorithm_shift == 0.0);
    CHECK(r.vertices == std::vector<int>{0});
    CHECK(r.best_vertex == 0);
    CHECK(r.beliefs_used.find("strategic") != std::string::npos);

    UserParams naive;
    naive.mode = UserParams::Mode::Naive;
    CounterfactualReport rn = counterfactual_audit(inst.game, inst.game.algorithm, naive);
    CHECK(std::abs(rn.true_value - 0.625) <= 1e-12);
    CHECK(rn.beliefs_used.find("naive") != std::string::npos);

    CHECK_THROWS_AS(counterfactual_audit(inst.game, nullptr, strategic), ValidationError);
}

TEST_CASE("toxicity-reweighting audit: optimistic prediction, better reality") {
    ToxicityAuditSetup setup = make_toxicity_audit_instance();
    CHECK(setup.stylized.gamma == doctest::Approx(0.25).epsilon(1e-15));
    auto forms = setup.closed_forms();
    CHECK(std::abs(forms.current - 0.7125) <= 1e-12);
    CHECK(std::abs(forms.predicted_cf - 0.700327868852459) <= 1e-12);
    CHECK(std::abs(forms.true_cf - 0.9566628794026943) <= 1e-12);

    // Downweighted items: liked-A and disliked-B.
    for (int z = 0; z < 8; ++z) {
        bool down = (setup.stylized.in_a(z) && setup.stylized.likes(z)) ||
                    (!setup.stylized.in_a(z) && !setup.stylized.likes(z));
        CHECK(setup.weights[static_cast<size_t>(z)] == (down ? 0.01 : 1.0));
    }

    UserParams strategic;
    CounterfactualReport same =
        counterfactual_audit(setup.stylized.game, setup.stylized.game.algorithm, strategic);
    CHECK(std::abs(same.predicted - forms.current) <= 1e-9);
    CHECK(std::abs(same.true_value - forms.current) <= 1e-9);
    CHECK(same.gap <= 1e-9);

    CounterfactualReport cf =
        counterfactual_audit(setup.stylized.game, setup.counterfactual, strategic);
    CHECK(std::abs(cf.predicted - forms.predicted_cf) <= 1e-9);
    CHECK(std::abs(cf.true_value - forms.true_cf) <= 1e-9);
    CHECK(cf.predicted < forms.current);
    CHECK(forms.current < cf.true_value);
    CHECK(cf.algorithm_shift > 0.0);

    CHECK_THROWS_AS(make_toxicity_audit_instance(0.0), ValidationError);
    CHECK_THROWS_AS(make_toxicity_audit_instance(1.5), ValidationError);
}

TEST_CASE("toxicity audit closed forms track the downweighting strength") {
    for (double alpha : {0.001, 0.05}) {
        ToxicityAuditSetup setup = make_toxicity_audit_instance(alpha);
        auto forms = setup.closed_forms();
        UserParams strategic;
        CounterfactualReport cf =
            counterfactual_audit(setup.stylized.game, setup.counterfactual, strategic);
        CHECK(std::abs(cf.predicted - forms.predicted_cf) <= 1e-9);
        CHECK(std::abs(cf.true_value - forms.true_cf) <= 1e-9);
        CHECK(cf.predicted < forms.current);
    }
    auto low = make_toxicity_audit_instance(0.001).closed_forms();
    CHECK(std::abs(low.predicted_cf - 0.7000332778702162) <= 1e-12);
    auto high = make_toxicity_audit_instance(0.05).closed_forms();
    CHECK(std::abs(high.true_cf - 0.9186813186813187) <= 1e-12);
    CHECK(std::abs(high.predicted_cf - 0.7015384615384616) <= 1e-12);
}

TEST_CASE("behavior nets enumerate exactly the eps-spaced distributions") {
    CHECK(behavior_net(2, 1.0).size() == 2);
    CHECK(behavior_net(2, 0.5).size() == 3);
    CHECK(behavior_net(2, 0.25).size() == 5);
    auto net = behavior_net(2, 0.5);
    CHECK(net[0] == Vec{1.0, 0.0});
    CHECK(net[1] == Vec{0.5, 0.5});
    CHECK(net[2] == Vec{0.0, 1.0});

    CHECK_THROWS_AS(behavior_net(2, 0.0), ValidationError);
    CHECK_THROWS_AS(behavior_net(2, 1.5), ValidationError);
    CHECK_THROWS_WITH_AS(behavior_net(2, 0.3), doctest::Contains("divide 1 exactly"),
                         ValidationError);

    ModelClass net_class = epsilon_net_class(Spaces{3, 2}, 0.25);
    CHECK(net_class.size() == 125);
    CHECK(net_class.items() == 3);
    // Any user strategy is within eps per entry of some net model.
    Strategy user(Mat{{0.37, 0.63}, {0.9, 0.1}, {0.48, 0.52}});
    double best = kInf;
    for (const Strategy& m : net_class.models) {
        double worst = 0.0;
        for (int z = 0; z < 3; ++z)
            for (int b = 0; b < 2; ++b)
                worst = std::max(worst, std::abs(user.prob(z, b) - m.prob(z, b)));
        best = std::min(best, worst);
    }
    CHECK(best <= 0.25 / 2 + 1e-12);

    CHECK_THROWS_WITH_AS(epsilon_net_class(Spaces{10, 2}, 0.25, 1000),
                         doctest::Contains("coarsen eps"), ValidationError);
}

TEST_CASE("per-item KL and the survivor bound") {
    Strategy user(Mat{{1.0, 0.0}, {0.5, 0.5}});
    Strategy model(Mat{{0.75, 0.25}, {0.5, 0.5}});
    CHECK(worst_item_kl(user, model) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-15));
    CHECK(worst_item_kl(user, user) == 0.0);
    CHECK(worst_item_kl(user, Strategy(Mat{{0.0, 1.0}, {0.5, 0.5}})) == kInf);
    CHECK_THROWS_AS(worst_item_kl(user, Strategy(Mat{{0.5, 0.5}})), ValidationError);

    CHECK(net_survivor_kl_bound(2, 0.25) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(net_survivor_kl_bound(2, 0.5) == kInf);
    CHECK(net_survivor_kl_bound(2, 0.1) == doctest::Approx(std::log(1.25)).epsilon(1e-15));
}

TEST_CASE("epsilon-net survivors stay KL-close to the true behavior") {
    // 2 items, eps = 0.25 net (25 models); certify at the simplex vertices.
    Spaces sp{2, 2};
    GameInstance g;
    g.spaces = sp;
    g.models = epsilon_net_class(sp, 0.25);
    g.user_payoff = PayoffMatrix(Mat{{0.0, 1.0}, {0.0, -1.0}}, -1.0, 1.0);
    g.platform_payoff = PayoffMatrix(Mat{{0.0, 1.0}, {0.0, 1.0}}, 0.0, 1.0);
    g.initial_belief = Belief::uniform(g.models.size());
    // The net contains an all-ignore model, so an engagement feed would have
    // no signal at that vertex; a uniform rule keeps every grid point valid.
    g.algorithm = std::make_shared<UniformProposer>();

    DominanceParams params;
    params.grid_resolution = 1;

    const double bound = net_survivor_kl_bound(2, 0.25);
    for (int c = 0; c < 10; ++c) {
        Mat rows;
        for (int z = 0; z < 2; ++z) {
            double q = 0.05 + 0.9 * uniform01(77, 0x21, static_cast<std::uint64_t>(c * 2 + z));
            rows.push_back({1.0 - q, q});
        }
        Strategy user{rows};
        StableSetResult s = stable_set(g, user, params);
        REQUIRE_FALSE(s.survivors.empty());
        for (int idx : s.survivors)
            CHECK(worst_item_kl(user, g.models.models[static_cast<size_t>(idx)]) <= bound + 1e-9);
    }
}

TEST_CASE("predictability bound for near-correct model classes") {
    Spaces sp{2, 2};
    GameInstance g;
    g.spaces = sp;
    g.models = epsilon_net_class(sp, 0.25);
    g.user_payoff = PayoffMatrix(Mat{{0.0, 1.0}, {0.0, -1.0}}, -1.0, 1.0);
    g.platform_payoff = PayoffMatrix(Mat{{0.0, 1.0}, {0.0, 1.0}}, 0.0, 1.0);
    g.initial_belief = Belief::uniform(g.models.size());
    g.algorithm = std::make_shared<UniformProposer>(); // safe at the all-ignore vertex

    DominanceParams params;
    params.grid_resolution = 1;

    auto p_cf = std::make_shared<UniformProposer>();
    PredictabilityCheck check = br_predictability_check(g, p_cf, 0.25, std::nullopt, params);
    CHECK(check.lipschitz.source == LipschitzEstimate::Source::Exact);
    CHECK(check.lipschitz.value == 0.0);
    CHECK(check.bound == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(check.holds);
    CHECK(check.empirical_gap <= check.bound + 1e-12);
    CHECK_FALSE(check.vertices.empty());

    // Finer net: 81 models, bound sqrt(2 * 0.125) = 0.5.
    GameInstance fine = g;
    fine.models = epsilon_net_class(sp, 0.125);
    fine.initial_belief = Belief::uniform(fine.models.size());
    PredictabilityCheck fc = br_predictability_check(fine, p_cf, 0.125, std::nullopt, params);
    CHECK(fc.bound == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(fc.holds);

    // A supplied Lipschitz constant widens the certified bound.
    PredictabilityCheck supplied = br_predictability_check(g, p_cf, 0.25, 1.0, params);
    CHECK(supplied.lipschitz.source == LipschitzEstimate::Source::Supplied);
    CHECK(supplied.bound == doctest::Approx(3.0 * std::sqrt(0.5)).epsilon(1e-15));

    // A belief-dependent counterfactual gets an estimated constant. Tabular
    // feeds stay strictly positive at every vertex of the net class.
    Mat cf_rows;
    for (int m = 0; m < g.models.size(); ++m) {
        const double q = (m + 1) / (g.models.size() + 1.0);
        cf_rows.push_back({q, 1.0 - q});
    }
    std::vector<Distribution> cf_feeds;
    for (auto& r : cf_rows) cf_feeds.emplace_back(std::move(r));
    auto tabular_cf = std::make_shared<TabularProposer>(std::move(cf_feeds));
    PredictabilityCheck est = br_predictability_check(g, tabular_cf, 0.25, std::nullopt, params);
    CHECK(est.lipschitz.source == LipschitzEstimate::Source::Estimated);
    CHECK(est.lipschitz.value > 0.0);

    CHECK_THROWS_AS(br_predictability_check(g, nullptr, 0.25, std::nullopt, params),
                    ValidationError);
}

TEST_CASE("squared-loss payoffs decompose into variance plus squared bias") {
    StylizedInstance inst = make_stylized(detail::s1_params());
    const PayoffMatrix& P = inst.game.platform_payoff;
    Strategy user(Mat(8, Vec{0.3, 0.7}));
    Distribution feed = inst.game.algorithm->propose(inst.game.models, Belief::uniform(3));

    double mean = platform_value(feed, user, P);
    double second = platform_value(feed, user, quadratic_payoff(P, 0.0));
    double variance = second - mean * mean;
    for (double c : {0.0, 0.3, 0.7125, 1.0}) {
        double lhs = platform_value(feed, user, quadratic_payoff(P, c));
        double rhs = variance + (mean - c) * (mean - c);
        CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
}
