#include <doctest.h>

#include <cmath>

#include "edgecov/modelselect.hpp"
#include "edgecov/simgen.hpp"
#include "testutil.hpp"

using namespace edgecov;
using namespace edgecov::modelselect;
using covariance::Matrix;
using sampler::ChainTrace;

namespace {

// A minimal trace carrying a given log-likelihood series and full acceptance.
ChainTrace toy_trace(const std::vector<double>& loglik, int burn_in, int k = 1) {
    ChainTrace tr;
    tr.v = 3;
    tr.k = k;
    tr.iters = static_cast<int>(loglik.size());
    tr.burn_in = burn_in;
    tr.loglik = loglik;
    tr.labels.assign(tr.iters, std::vector<int>(3, 1));
    tr.rho.assign(tr.iters, std::vector<double>(k + 1, 0.3));
    tr.label_accept.assign(tr.iters, std::vector<std::uint8_t>(3, 1));
    tr.rho_accept.assign(tr.iters, std::vector<std::int8_t>(k + 1, 1));
    return tr;
}

} // namespace

TEST_CASE("waic closed forms") {
    SUBCASE("two draws, one subject") {
        const double a = -1.3, b = -0.7;
        Matrix pw(2, 1);
        pw << a, b;
        const WaicResult w = waic(pw);
        const double lppd = std::log((std::exp(a) + std::exp(b)) / 2.0);
        const double pen = (a - b) * (a - b) / 2.0;
        CHECK(w.lppd == doctest::Approx(lppd).epsilon(1e-12));
        CHECK(w.penalty == doctest::Approx(pen).epsilon(1e-12));
        CHECK(w.waic == doctest::Approx(-2.0 * lppd + 2.0 * pen).epsilon(1e-12));
        CHECK(w.log_neg_defined == (w.waic < 0.0));
    }
    SUBCASE("subjects sum independently") {
        Matrix pw(3, 2);
        pw << -1.0, -2.0, -1.5, -2.5, -0.5, -1.5;
        const WaicResult w = waic(pw);
        const WaicResult w1 = waic(pw.col(0));
        const WaicResult w2 = waic(pw.col(1));
        CHECK(w.lppd == doctest::Approx(w1.lppd + w2.lppd).epsilon(1e-12));
        CHECK(w.penalty == doctest::Approx(w1.penalty + w2.penalty).epsilon(1e-12));
    }
    SUBCASE("constant draws have zero penalty and negative waic") {
        Matrix pw = Matrix::Constant(5, 3, -2.0);
        const WaicResult w = waic(pw);
        CHECK(w.penalty == 0.0);
        CHECK(w.lppd == doctest::Approx(-6.0).epsilon(1e-12));
        CHECK(w.waic == doctest::Approx(12.0).epsilon(1e-12));
        CHECK(!w.log_neg_defined);
        CHECK(std::isnan(w.log_neg_waic));
    }
    SUBCASE("log of the negated value when waic is negative") {
        Matrix pw = Matrix::Constant(4, 2, 3.0); // density > 1, lppd positive
        const WaicResult w = waic(pw);
        CHECK(w.waic == doctest::Approx(-12.0).epsilon(1e-12));
        CHECK(w.log_neg_defined);
        CHECK(w.log_neg_waic == doctest::Approx(std::log(12.0)).epsilon(1e-12));
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(waic(Matrix::Zero(1, 3)), std::invalid_argument);
        Matrix bad = Matrix::Constant(3, 1, -1.0);
        bad(1, 0) = -std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(waic(bad), std::invalid_argument);
    }
}

TEST_CASE("convergence assessment") {
    Rng rng(51);
    const WaicResult good{-100.0, 60.0, 10.0, true, std::log(100.0)};

    SUBCASE("stationary noise passes") {
        std::vector<double> ll(600);
        for (double& x : ll) x = -500.0 + rnorm(rng, 0.0, 1.0);
        const ConvergenceReport rep = assess_convergence(toy_trace(ll, 100), &good);
        CHECK(rep.converged);
        CHECK(rep.reason.empty());
    }
    SUBCASE("a mean shift between halves fails") {
        std::vector<double> ll(600);
        for (int t = 0; t < 600; ++t)
            ll[t] = (t < 350 ? -520.0 : -480.0) + rnorm(rng, 0.0, 1.0);
        const ConvergenceReport rep = assess_convergence(toy_trace(ll, 100), &good);
        CHECK(!rep.converged);
        CHECK(rep.split_z > 3.0);
        CHECK(rep.reason.find("halves disagree") != std::string::npos);
    }
    SUBCASE("a frozen rho block fails") {
        std::vector<double> ll(600);
        for (double& x : ll) x = -500.0 + rnorm(rng, 0.0, 1.0);
        ChainTrace tr = toy_trace(ll, 100);
        for (auto& row : tr.rho_accept) row[1] = 0; // attempted, never accepted
        const ConvergenceReport rep = assess_convergence(tr, &good);
        CHECK(!rep.converged);
        CHECK(rep.zero_acceptance_block);
    }
    SUBCASE("an unattempted rho block is fine") {
        std::vector<double> ll(600);
        for (double& x : ll) x = -500.0 + rnorm(rng, 0.0, 1.0);
        ChainTrace tr = toy_trace(ll, 100, 2);
        for (auto& row : tr.rho_accept) row[2] = -1; // class empty, never attempted
        const ConvergenceReport rep = assess_convergence(tr, &good);
        CHECK(rep.converged);
    }
    SUBCASE("nonnegative waic only matters when the gate is on") {
        std::vector<double> ll(600);
        for (double& x : ll) x = -500.0 + rnorm(rng, 0.0, 1.0);
        const WaicResult bad{4.0e5, -2.0e5, 100.0, false,
                             std::numeric_limits<double>::quiet_NaN()};
        const ConvergenceReport rep = assess_convergence(toy_trace(ll, 100), &bad);
        CHECK(rep.converged);
        CHECK(!rep.waic_usable);
        ConvergenceCriteria crit;
        crit.require_negative_waic = true;
        const ConvergenceReport rep2 = assess_convergence(toy_trace(ll, 100), &bad, crit);
        CHECK(!rep2.converged);
        CHECK(rep2.reason.find("WAIC") != std::string::npos);
    }
    SUBCASE("too short to judge") {
        const std::vector<double> ll(40, -1.0);
        const ConvergenceReport rep = assess_convergence(toy_trace(ll, 10), &good);
        CHECK(!rep.converged);
        CHECK(rep.reason.find("retained") != std::string::npos);
    }
}

TEST_CASE("k scan runs candidates and recommends by waic") {
    const auto gt = simgen::make_ground_truth({3, 3, 4}, {0.2, 0.4, 0.9}, 1.5, 0.01);
    const auto data = simgen::generate(gt, 632, 61);
    MHConfig base;
    base.iters = 600;
    base.burn_in = 150;
    base.seed = 61;

    const KScanResult serial = k_scan(data, base, {2, 3, 4, 6}, 1);
    REQUIRE(serial.rows.size() == 4);
    CHECK(serial.rows[0].k == 2);
    CHECK(serial.rows[3].k == 6);
    CHECK(!serial.rows[3].runnable); // 2*6 > 10
    CHECK(!serial.rows[3].note.empty());
    CHECK(serial.rows[1].runnable);
    CHECK(serial.rows[1].feasible_strict);
    CHECK(!serial.rows[2].feasible_strict); // 3*4 > 10, still runnable
    CHECK(serial.rows[1].k_hat == 3);

    // threading changes nothing about the results
    const KScanResult par = k_scan(data, base, {2, 3, 4, 6}, 3);
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(par.rows[i].k == serial.rows[i].k);
        if (!serial.rows[i].runnable) continue;
        CHECK(par.rows[i].waic.waic == serial.rows[i].waic.waic);
        CHECK(par.rows[i].converged == serial.rows[i].converged);
    }

    if (serial.recommended_k.has_value()) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (const auto& row : serial.rows) {
            if (!row.runnable || !row.converged) continue;
            if (row.waic.waic < best) {
                best = row.waic.waic;
                arg = row.k;
            }
        }
        CHECK(*serial.recommended_k == arg);
    }

    CHECK_THROWS_AS(k_scan(data, base, {}, 1), std::invalid_argument);
}
