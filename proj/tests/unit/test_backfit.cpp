#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "liso/backfit.hpp"
#include "liso/numeric.hpp"
#include "liso/rng.hpp"
#include "liso/shrink.hpp"
#include "support/instances.hpp"

using namespace liso;

namespace {

Dataset univariate_dataset(std::vector<double> x, std::vector<double> y,
                           std::vector<double> w = {}) {
    return Dataset::make(std::move(y), {std::move(x)}, std::move(w));
}

}  // namespace

TEST_CASE("objective matches the hand-computed instance") {
    const Dataset d = univariate_dataset({0.0, 1.0, 2.0}, {-1.0, 0.0, 1.0});
    LisoConfig c;
    c.lambda = 0.5;
    AdditiveModel m;
    m.lambda = 0.5;
    m.intercept = 0.0;
    m.components.push_back(StepFunction({0.0, 1.0, 2.0}, {-0.5, 0.0, 0.5}));
    m.directions.push_back(Direction::increasing);
    CHECK(objective(d, m, c) == doctest::Approx(0.75));
}

TEST_CASE("objective of the zero model is half the weighted response scatter") {
    Rng rng(31);
    const Dataset d = testing::random_dataset(rng, 9, 2, true);
    LisoConfig c;
    c.lambda = 0.7;
    AdditiveModel zero;
    zero.lambda = 0.7;
    zero.intercept = d.y_mean();
    zero.components.resize(2);
    zero.directions.assign(2, Direction::increasing);
    CompensatedSum half_ss;
    for (std::size_t i = 0; i < d.n(); ++i)
        half_ss.add(0.5 * d.weights()[i] * d.y_centered()[i] * d.y_centered()[i]);
    CHECK(objective(d, zero, c) == doctest::Approx(half_ss.value()));
}

TEST_CASE("p=1 fit reproduces the univariate solver") {
    Rng rng(20260821);
    for (int t = 0; t < 30; ++t) {
        std::vector<double> x, y, w;
        testing::random_raw(rng, 10, x, y, w);
        const SortedSeries s = merge_ties(x, y, w);
        const double lam = rng.uniform(0.0, 1.0) * (zero_threshold(s) + 0.05);
        const Dataset d = univariate_dataset(x, y, w);
        LisoConfig c;
        c.lambda = lam;
        const AdditiveModel m = liso_fit(d, c);
        const StepFunction f = univariate_liso(s, lam);
        const std::vector<double> got = fitted(d, m);
        double y_mean = 0.0, w_tot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            y_mean += w[i] * y[i];
            w_tot += w[i];
        }
        y_mean /= w_tot;
        for (std::size_t i = 0; i < got.size(); ++i) {
            // univariate solver keeps the mean inside; the model centres it out
            CHECK(got[i] == doctest::Approx(f(x[i])).epsilon(1e-10));
        }
        CHECK(m.intercept == doctest::Approx(y_mean));
    }
}

TEST_CASE("every component is centred and the intercept is the weighted mean") {
    Rng rng(32);
    const Dataset d = testing::random_dataset(rng, 25, 4, true);
    LisoConfig c;
    c.lambda = 0.15;
    const AdditiveModel m = liso_fit(d, c);
    CHECK(m.intercept == doctest::Approx(d.y_mean()));
    for (std::size_t k = 0; k < m.p(); ++k) {
        if (m.components[k].empty()) continue;
        const auto& idx = d.covariate_index(k);
        CompensatedSum mass;
        for (std::size_t g = 0; g < idx.groups(); ++g)
            mass.add(idx.group_weight[g] * m.components[k].values()[g]);
        CHECK(std::abs(mass.value()) < 1e-9);
        CHECK(m.components[k].non_decreasing());
    }
    // fitted-mean preservation: weighted mean of fits equals weighted y mean
    CompensatedSum fit_mass;
    const std::vector<double> f = fitted(d, m);
    for (std::size_t i = 0; i < d.n(); ++i) fit_mass.add(d.weights()[i] * f[i]);
    CHECK(fit_mass.value() / d.weight_total() == doctest::Approx(d.y_mean()).epsilon(1e-9));
}

TEST_CASE("loss decreases monotonically across cycles") {
    Rng rng(33);
    const Dataset d = testing::random_dataset(rng, 40, 6);
    LisoConfig c;
    c.lambda = 0.05;
    c.record_loss_trace = true;
    const AdditiveModel m = liso_fit(d, c);
    REQUIRE(m.diagnostics.loss_trace.size() >= 1);
    for (std::size_t i = 1; i < m.diagnostics.loss_trace.size(); ++i)
        CHECK(m.diagnostics.loss_trace[i] <= m.diagnostics.loss_trace[i - 1] + 1e-12);
    CHECK(m.diagnostics.converged);
    CHECK(m.diagnostics.final_loss == doctest::Approx(objective(d, m, c)).epsilon(1e-9));
}

TEST_CASE("a refit cycle at the optimum moves nothing") {
    Rng rng(34);
    for (int t = 0; t < 10; ++t) {
        const Dataset d = testing::random_dataset(rng, 30, 3);
        LisoConfig c;
        c.lambda = 0.1 * (t + 1) / 4.0;
        const AdditiveModel m = liso_fit(d, c);
        CHECK(max_refit_change(d, m, c) < 10 * c.tol_change);
    }
}

TEST_CASE("lambda_max flattens everything and 0.999 of it does not") {
    Rng rng(35);
    for (int t = 0; t < 10; ++t) {
        const std::size_t n = 12;
        // dominant covariate: strictly increasing response in x1
        std::vector<double> x1(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x1[i] = static_cast<double>(i);
            y[i] = static_cast<double>(i) + 0.01 * rng.uniform(-1.0, 1.0);
        }
        std::vector<std::vector<double>> cols{x1};
        for (int k = 0; k < 3; ++k) {
            std::vector<double> c(n);
            for (auto& v : c) v = rng.uniform(-1.0, 1.0);
            cols.push_back(std::move(c));
        }
        const Dataset d = Dataset::make(y, cols);
        const double lmax = lambda_max(d);
        LisoConfig c;
        c.lambda = lmax;
        CHECK(liso_fit(d, c).active_count() == 0);
        c.lambda = 0.999 * lmax;
        CHECK(liso_fit(d, c).active_count() > 0);
    }
}

TEST_CASE("lambda_max for p=1 equals the univariate zero threshold") {
    Rng rng(36);
    std::vector<double> x, y, w;
    testing::random_raw(rng, 10, x, y, w);
    const Dataset d = univariate_dataset(x, y, w);
    CHECK(lambda_max(d) == doctest::Approx(zero_threshold(merge_ties(x, y, w))).epsilon(1e-12));
    // duplicated covariate leaves the bound unchanged
    const Dataset d2 = Dataset::make(y, {x, x}, w);
    CHECK(lambda_max(d2) == doctest::Approx(lambda_max(d)));
}

TEST_CASE("zero response gives a zero lambda_max") {
    const Dataset d = univariate_dataset({0.0, 1.0, 2.0}, {3.0, 3.0, 3.0});
    CHECK(lambda_max(d) == 0.0);
}

TEST_CASE("fit matches the expanded-design objective on small instances") {
    // cross-check deferred to the oracle suite; here: two covariates, exact tie
    Rng rng(37);
    const Dataset d = testing::random_dataset(rng, 8, 2);
    LisoConfig c;
    c.lambda = 0.2;
    const AdditiveModel m = liso_fit(d, c);
    // objective is a fixed point: refitting from scratch can only match it
    const AdditiveModel again = liso_fit(d, c, &m);
    CHECK(objective(d, again, c) == doctest::Approx(objective(d, m, c)).epsilon(1e-10));
}

TEST_CASE("path warm starts agree with cold fits") {
    Rng rng(38);
    const Dataset d = testing::random_dataset(rng, 30, 5);
    const double lmax = lambda_max(d);
    std::vector<double> grid{lmax * 0.8, lmax * 0.4, lmax * 0.1, lmax * 0.02};
    LisoConfig c;
    const std::vector<AdditiveModel> path = liso_path(d, grid, c);
    REQUIRE(path.size() == grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        LisoConfig cj;
        cj.lambda = grid[j];
        const AdditiveModel cold = liso_fit(d, cj);
        const double scale = std::max(1.0, std::abs(objective(d, cold, cj)));
        CHECK(std::abs(objective(d, path[j], cj) - objective(d, cold, cj)) <= 1e-6 * scale);
    }
}

TEST_CASE("path at and above lambda_max returns zero models") {
    Rng rng(39);
    const Dataset d = testing::random_dataset(rng, 15, 3);
    const double lmax = lambda_max(d);
    const std::vector<double> grid{2 * lmax, lmax};
    for (const AdditiveModel& m : liso_path(d, grid, {}))
        CHECK(m.active_count() == 0);
}

TEST_CASE("active count trends down as lambda grows") {
    // three linear signals among twenty covariates
    Rng rng(40);
    const std::size_t n = 50, p = 20;
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (auto& c : cols)
        for (auto& v : c) v = rng.uniform(-1.0, 1.0);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = cols[0][i] + cols[1][i] + cols[2][i] + 0.3 * rng.normal();
    const Dataset d = Dataset::make(y, cols);
    const double lmax = lambda_max(d);
    std::vector<double> grid;
    for (int j = 0; j < 12; ++j) grid.push_back(lmax * std::pow(0.55, j + 1));
    const std::vector<AdditiveModel> path = liso_path(d, grid, {});
    std::vector<std::size_t> active;
    for (const auto& m : path) active.push_back(m.active_count(1e-8));
    // descending lambda: counts should not shrink, a stray plateau aside
    int inversions = 0;
    for (std::size_t j = 1; j < active.size(); ++j)
        if (active[j] + 1 < active[j - 1]) ++inversions;
    CHECK(inversions == 0);
    CHECK(active.back() >= active.front());
    CHECK(active.back() >= 3);
}

TEST_CASE("directions flip and drop as configured") {
    Rng rng(41);
    const std::size_t n = 20;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform(-1.0, 1.0);
        y[i] = -2.0 * x[i] + 0.05 * rng.normal();
    }
    const Dataset d = Dataset::make(y, {x});
    LisoConfig c;
    c.lambda = 0.05;
    c.directions = {Direction::decreasing};
    const AdditiveModel m = liso_fit(d, c);
    REQUIRE(m.components[0].size() > 0);
    CHECK(m.components[0].non_increasing());
    CHECK(m.components[0].total_variation() > 1.0);

    // increasing-only config cannot explain a decreasing signal
    LisoConfig ci;
    ci.lambda = 0.05;
    const AdditiveModel mi = liso_fit(d, ci);
    CHECK(objective(d, m, c) < objective(d, mi, ci));
}

TEST_CASE("infinite penalty weight removes a covariate, zero leaves it free") {
    // y rises with x0 so its unpenalised isotonic fit is far from flat
    Rng rng(42);
    const std::size_t n = 16;
    std::vector<double> x0(n), x1(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x0[i] = static_cast<double>(i);
        x1[i] = rng.uniform(-1.0, 1.0);
        y[i] = 0.5 * static_cast<double>(i) + rng.uniform(-0.2, 0.2);
    }
    const Dataset d = Dataset::make(y, {x0, x1});
    LisoConfig c;
    c.lambda = 0.05;
    c.penalty_weights = {std::numeric_limits<double>::infinity(), 1.0};
    const AdditiveModel m = liso_fit(d, c);
    CHECK_FALSE(m.component_active(0));

    LisoConfig cz;
    cz.lambda = 1e9;  // huge lambda, but covariate 0 unpenalised
    cz.penalty_weights = {0.0, 1.0};
    const AdditiveModel mz = liso_fit(d, cz);
    CHECK(mz.component_active(0));
    CHECK_FALSE(mz.component_active(1));
}

TEST_CASE("prediction uses flat extrapolation and optional interpolation") {
    const Dataset d = univariate_dataset({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0});
    LisoConfig c;
    c.lambda = 0.0;
    const AdditiveModel m = liso_fit(d, c);
    const std::vector<std::vector<double>> probe{{-5.0, 0.5, 5.0}};
    const std::vector<double> step = predict(m, probe);
    CHECK(step[0] == doctest::Approx(0.0));
    CHECK(step[1] == doctest::Approx(0.0));  // right-continuous: holds left value
    CHECK(step[2] == doctest::Approx(2.0));
    const std::vector<double> lin = predict(m, probe, true);
    CHECK(lin[1] == doctest::Approx(0.5));
    // training inputs reproduce training fits
    const std::vector<double> at_train = predict(m, d.columns());
    const std::vector<double> f = fitted(d, m);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(at_train[i] == doctest::Approx(f[i]));
}

TEST_CASE("fixed and random cycle orders reach the same optimum") {
    Rng rng(43);
    const Dataset d = testing::random_dataset(rng, 10, 3);
    LisoConfig c;
    c.lambda = 0.08;
    const AdditiveModel fixed = liso_fit(d, c);
    c.random_cycle_order = true;
    c.cycle_seed = 977;
    const AdditiveModel shuffled = liso_fit(d, c);
    CHECK(objective(d, fixed, c) == doctest::Approx(objective(d, shuffled, c)).epsilon(1e-8));
}

TEST_CASE("overlap removal preserves sums and makes variations additive") {
    Rng rng(44);
    for (int t = 0; t < 50; ++t) {
        const std::size_t m = 2 + rng.below(8);
        std::vector<double> inc(m), dec(m), sum(m);
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            a += rng.uniform(0.0, 1.0);
            b -= rng.uniform(0.0, 1.0);
            inc[j] = a;
            dec[j] = b;
            sum[j] = a + b;
        }
        detail::remove_overlap(inc, dec);
        double tv_sum = 0.0, tv_inc = 0.0, tv_dec = 0.0;
        for (std::size_t j = 1; j < m; ++j) {
            tv_sum += std::abs(sum[j] - sum[j - 1]);
            tv_inc += inc[j] - inc[j - 1];
            tv_dec += dec[j - 1] - dec[j];
            // shift accumulation can cancel to one ulp below exact monotone
            CHECK(inc[j] >= inc[j - 1] - 1e-12);
            CHECK(dec[j] <= dec[j - 1] + 1e-12);
        }
        for (std::size_t j = 0; j < m; ++j)
            CHECK(inc[j] + dec[j] == doctest::Approx(sum[j]).epsilon(1e-12));
        CHECK(tv_inc + tv_dec == doctest::Approx(tv_sum).epsilon(1e-12));
    }
}

TEST_CASE("config validation rejects bad shapes") {
    LisoConfig c;
    c.lambda = -1.0;
    CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
    c.lambda = 0.0;
    c.penalty_weights = {1.0};
    CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
    c.penalty_weights = {1.0, -2.0};
    CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
    c.penalty_weights = {1.0, 1.0};
    c.max_cycles = 0;
    CHECK_THROWS_AS(c.validate(2), std::invalid_argument);
}
