#include <doctest.h>

#include "skg/designer.hpp"
#include "test_util.hpp"

using namespace skg;

namespace {

UserStatistics make_user(const Eigen::MatrixXcd& Q, const Eigen::VectorXd& lambda,
                         double ul_snr) {
    UserStatistics u;
    u.modes.M = Q.rows();
    u.modes.S = Q.cols();
    u.modes.Q = Q;
    u.modes.lambda = lambda;
    u.uplink_snr = ul_snr;
    return u;
}

DesignRequest single_request(const UserStatistics& u, double budget, double noise = 1.0) {
    DesignRequest req;
    req.users = {u};
    req.dl_budget = budget;
    req.dl_noise_var = noise;
    return req;
}

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("water filling solver") {
    SUBCASE("equal gains split the budget evenly") {
        const auto a = water_fill(Eigen::VectorXd::Ones(2), 1.0, 1.0);
        CHECK(a.powers(0) == doctest::Approx(0.5));
        CHECK(a.powers(1) == doctest::Approx(0.5));
        CHECK(a.water_level == doctest::Approx(1.5));
        CHECK(a.active_count == 2);
    }
    SUBCASE("hand-derived two-mode case") {
        const auto a = water_fill(vec2(2.0, 1.0), 1.0, 1.0);
        CHECK(a.water_level == doctest::Approx(1.25).epsilon(1e-14));
        CHECK(a.powers(0) == doctest::Approx(0.75).epsilon(1e-14));
        CHECK(a.powers(1) == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("small budget deactivates the weak mode") {
        const auto a = water_fill(vec2(2.0, 1.0), 0.2, 1.0);
        CHECK(a.powers(0) == doctest::Approx(0.2).epsilon(1e-14));
        CHECK(a.powers(1) == 0.0);
        CHECK(a.active_count == 1);
    }
    SUBCASE("unsorted gains rejected") {
        CHECK_THROWS_AS(water_fill(vec2(1.0, 2.0), 1.0, 1.0), std::invalid_argument);
    }
    SUBCASE("matches the bisection oracle on random instances") {
        CounterRng rng(31);
        for (int i = 0; i < 200; ++i) {
            const long S = 1 + static_cast<long>(rng.next_u64() % 6);
            Eigen::VectorXd lam(S);
            for (long s = 0; s < S; ++s) lam(s) = 0.05 + 5.0 * rng.next_uniform();
            std::sort(lam.data(), lam.data() + S, std::greater<double>());
            const double budget = 0.01 + 10.0 * rng.next_uniform();
            const double s2 = 0.2 + 2.0 * rng.next_uniform();
            const auto a = water_fill(lam, budget, s2);
            const double mu_oracle = testutil::waterfill_mu_bisect(lam, budget, s2);
            CHECK(a.water_level == doctest::Approx(mu_oracle).epsilon(1e-9));
            CHECK(a.powers.sum() == doctest::Approx(budget).epsilon(1e-9));
            // KKT: active modes touch the water level, inactive ones sit above it
            for (long s = 0; s < S; ++s) {
                if (a.powers(s) > 0.0)
                    CHECK(a.powers(s) ==
                          doctest::Approx(a.water_level - s2 / lam(s)).epsilon(1e-12));
                else
                    CHECK(a.water_level <= s2 / lam(s) + 1e-12);
            }
            for (long s = 1; s < S; ++s) CHECK(a.powers(s) <= a.powers(s - 1) + 1e-12);
        }
    }
    SUBCASE("active count grows with the budget and flattens at high SNR") {
        Eigen::VectorXd lam(4);
        lam << 4.0, 2.0, 1.0, 0.5;
        long prev = 0;
        for (double b : {0.1, 0.5, 2.0, 10.0, 1e4}) {
            const auto a = water_fill(lam, b, 1.0);
            CHECK(a.active_count >= prev);
            prev = a.active_count;
        }
        const auto a = water_fill(lam, 1e6, 1.0);
        CHECK(a.active_count == 4);
        CHECK(a.powers(0) / a.powers(3) == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("max_active caps the number of served modes") {
        const auto a = water_fill(vec2(2.0, 1.0), 1.0, 1.0, 1);
        CHECK(a.powers(0) == doctest::Approx(1.0));
        CHECK(a.powers(1) == 0.0);
    }
}

TEST_CASE("single-user design") {
    CounterRng rng(37);
    SUBCASE("single mode takes the whole budget") {
        const auto u = make_user(Eigen::MatrixXcd::Identity(3, 3).leftCols(1),
                                 Eigen::VectorXd::Constant(1, 2.0), 1.0);
        const auto seq = design_single_user(u, single_request(u, 1.5));
        CHECK(seq.T() == 1);
        CHECK(seq.power() == doctest::Approx(1.5).epsilon(1e-12));
    }
    SUBCASE("two-mode closed form capacity") {
        const auto u = make_user(Eigen::MatrixXcd::Identity(2, 2), vec2(2.0, 1.0), 1.0);
        const auto seq = design_single_user(u, single_request(u, 1.0));
        const double expect = std::log2(1.0 + 4.0 * 0.75 / (2.0 * 1.75 + 1.0)) +
                              std::log2(1.0 + 0.25 / (1.25 + 1.0));
        CHECK(capacity_woodbury(u, seq, 1.0) == doctest::Approx(expect).epsilon(1e-12));
        CHECK(capacity_determinant(u, seq, 1.0) == doctest::Approx(expect).epsilon(1e-10));
        CHECK(seq.power() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("pilot cap concentrates power on the strong mode") {
        const auto u = make_user(Eigen::MatrixXcd::Identity(2, 2), vec2(2.0, 1.0), 1.0);
        auto req = single_request(u, 1.0);
        req.max_pilots = 1;
        const auto seq = design_single_user(u, req);
        CHECK(seq.T() == 1);
        const double expect = std::log2(1.0 + 4.0 / (2.0 * 2.0 + 1.0));
        CHECK(capacity_woodbury(u, seq, 1.0) == doctest::Approx(expect).epsilon(1e-12));

        // exhaustive scan over rank-1 directions in the 2-mode span
        double best = 0.0;
        for (int a = 0; a <= 60; ++a)
            for (int p = 0; p < 40; ++p) {
                const double th = M_PI / 2.0 * a / 60.0;
                const double ph = 2.0 * M_PI * p / 40.0;
                Eigen::VectorXcd q(2);
                q << std::cos(th),
                    std::sin(th) * std::complex<double>(std::cos(ph), std::sin(ph));
                TrainingSequence cand{q};
                best = std::max(best, capacity_woodbury(u, cand, 1.0));
            }
        CHECK(capacity_woodbury(u, seq, 1.0) >= best - 1e-9);
    }
    SUBCASE("closed form equals the parallel formula and beats random designs") {
        for (int i = 0; i < 10; ++i) {
            const long S = 1 + static_cast<long>(rng.next_u64() % 4);
            UserStatistics u;
            u.modes = testutil::random_basis(6, S, rng);
            u.uplink_snr = 0.1 * std::pow(100.0, rng.next_uniform());
            const auto req = single_request(u, 2.0);
            const auto seq = design_single_user(u, req);
            const auto wf = water_fill(u.modes.lambda, 2.0, 1.0);
            const double closed = capacity_parallel(u.modes.lambda, u.uplink_snr, wf.powers);
            const double achieved = capacity_woodbury(u, seq, 1.0);
            CHECK(std::abs(achieved - closed) < 1e-9);
            for (int r = 0; r < 200; ++r) {
                const auto rival = testutil::random_training(6, 1 + r % 5, 2.0, rng);
                CHECK(capacity_woodbury(u, rival, 1.0) <= achieved + 1e-9);
            }
        }
    }
    SUBCASE("allocation independent of the UL SNR") {
        UserStatistics u = make_user(Eigen::MatrixXcd::Identity(3, 3),
                                     (Eigen::VectorXd(3) << 3.0, 1.5, 0.4).finished(), 1.0);
        Eigen::MatrixXcd ref;
        for (double snr : {0.1, 1.0, 100.0}) {
            u.uplink_snr = snr;
            const auto seq = design_single_user(u, single_request(u, 1.7));
            if (ref.size() == 0)
                ref = seq.S;
            else
                CHECK((seq.S - ref).norm() == doctest::Approx(0.0));
        }
    }
    SUBCASE("multi-user request rejected") {
        const auto u = make_user(Eigen::MatrixXcd::Identity(2, 2), vec2(2.0, 1.0), 1.0);
        DesignRequest req = single_request(u, 1.0);
        req.users.push_back(u);
        CHECK_THROWS_AS(design_single_user(u, req), std::invalid_argument);
    }
}

TEST_CASE("multi-user large-antenna design") {
    const Eigen::MatrixXcd I6 = Eigen::MatrixXcd::Identity(6, 6);
    const auto u1 = make_user(I6.leftCols(3), (Eigen::VectorXd(3) << 3.0, 2.0, 1.0).finished(), 10.0);
    const auto u2 = make_user(I6.middleCols(3, 2), vec2(2.5, 0.8), 10.0);

    SUBCASE("K=1 reduces to the single-user design") {
        DesignRequest req = single_request(u1, 2.0);
        const auto d = design_multi_user_large_antenna(req);
        const auto su = design_single_user(u1, req);
        CHECK((d.sequence.S - su.S).norm() < 1e-12);
        CHECK(d.coherence == 0.0);
    }
    SUBCASE("pilot count is the max single-user mode count") {
        DesignRequest req;
        req.users = {u1, u2};
        req.dl_budget = 50.0;  // enough to activate all modes
        req.dl_noise_var = 1.0;
        const auto d = design_multi_user_large_antenna(req);
        CHECK(d.sequence.T() == 3);
        CHECK(d.sequence.power() == doctest::Approx(50.0).epsilon(1e-9));
        CHECK(d.coherence == doctest::Approx(0.0));
    }
    SUBCASE("sum design equals pooled water-filling capacities") {
        DesignRequest req;
        req.users = {u1, u2};
        req.dl_budget = 4.0;
        req.dl_noise_var = 1.0;
        const auto d = design_multi_user_large_antenna(req);
        Eigen::VectorXd pooled(5);
        pooled << 3.0, 2.5, 2.0, 1.0, 0.8;
        const auto wf = water_fill(pooled, 4.0, 1.0);
        const double c1 = capacity_woodbury(u1, d.sequence, 1.0);
        const double c2 = capacity_woodbury(u2, d.sequence, 1.0);
        const double expect =
            capacity_parallel(pooled, 10.0, wf.powers);
        CHECK(c1 + c2 == doctest::Approx(expect).epsilon(1e-9));
    }
    SUBCASE("weighted sum with equal weights matches the plain sum") {
        DesignRequest req;
        req.users = {u1, u2};
        req.dl_budget = 4.0;
        req.dl_noise_var = 1.0;
        const auto plain = design_multi_user_large_antenna(req);
        req.criterion = Criterion::WeightedSum;
        req.weights = vec2(0.5, 0.5);
        const auto weighted = design_multi_user_large_antenna(req);
        CHECK((plain.sequence.S - weighted.sequence.S).norm() < 1e-6);
    }
    SUBCASE("max-min equalizes user capacities when ceilings permit") {
        DesignRequest req;
        req.users = {u1, u2};
        req.dl_budget = 6.0;
        req.dl_noise_var = 1.0;
        req.criterion = Criterion::Min;
        const auto d = design_multi_user_large_antenna(req);
        const double c1 = capacity_woodbury(u1, d.sequence, 1.0);
        const double c2 = capacity_woodbury(u2, d.sequence, 1.0);
        CHECK(std::abs(c1 - c2) < 1e-3);
        CHECK(d.sequence.power() <= 6.0 + 1e-9);
    }
    SUBCASE("t_max retains the strongest modes of each user") {
        DesignRequest req;
        req.users = {u1, u2};
        req.dl_budget = 50.0;
        req.dl_noise_var = 1.0;
        req.max_pilots = 1;
        const auto d = design_multi_user_large_antenna(req);
        CHECK(d.sequence.T() == 1);
    }
}

TEST_CASE("uniform design") {
    SUBCASE("splits the budget evenly over modes") {
        const auto u = make_user(Eigen::MatrixXcd::Identity(2, 2), vec2(1.0, 1.0), 1.0);
        const auto d = design_uniform(single_request(u, 1.0));
        CHECK(d.per_user_power[0].powers(0) == doctest::Approx(0.5));
        CHECK(d.per_user_power[0].powers(1) == doctest::Approx(0.5));
    }
    SUBCASE("coincides with water-filling for flat gains") {
        const auto u = make_user(Eigen::MatrixXcd::Identity(3, 3),
                                 Eigen::VectorXd::Constant(3, 2.0), 1.0);
        const auto req = single_request(u, 2.0);
        const auto uni = design_uniform(req);
        const auto opt = design_single_user(u, req);
        CHECK((uni.sequence.S - opt.S).norm() < 1e-12);
    }
    SUBCASE("never beats the optimal design") {
        const auto u = make_user(Eigen::MatrixXcd::Identity(2, 2), vec2(2.0, 1.0), 10.0);
        const auto req = single_request(u, 1.0);
        CHECK(capacity_woodbury(u, design_uniform(req).sequence, 1.0) <=
              capacity_woodbury(u, design_single_user(u, req), 1.0) + 1e-12);
    }
}
