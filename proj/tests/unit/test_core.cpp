#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapereg/core.hpp"
#include "shapereg/geometry.hpp"
#include "shapereg/rng.hpp"

using namespace shapereg;

namespace {

Dataset make_data(std::vector<double> x, std::vector<double> y, int d) {
    return Dataset(std::move(x), std::move(y), d);
}

HyperRect random_rect(Rng& rng, int d) {
    std::vector<double> lo(d), up(d);
    for (int k = 0; k < d; ++k) {
        double a = rng.uniform(), b = rng.uniform();
        lo[k] = std::min(a, b);
        up[k] = std::max(a, b);
    }
    return HyperRect(std::move(lo), std::move(up));
}

} // namespace

TEST_CASE("rect_geometry closed forms") {
    SUBCASE("unit square") {
        auto g = rect_geometry(HyperRect::unit_cube(2));
        CHECK(g.h_minus == 1.0);
        CHECK(g.h_plus == 1.0);
        CHECK(g.volume == 1.0);
        CHECK(g.diameter == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    }
    SUBCASE("half-height rectangle") {
        auto g = rect_geometry(HyperRect({0.0, 0.0}, {1.0, 0.5}));
        CHECK(g.h_minus == 0.5);
        CHECK(g.h_plus == 1.0);
        CHECK(g.volume == 0.5);
        CHECK(g.diameter == doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
    }
    SUBCASE("degenerate side") {
        auto g = rect_geometry(HyperRect({0.0, 0.25}, {1.0, 0.25}));
        CHECK(g.volume == 0.0);
        CHECK(g.diameter == 1.0);
    }
}

TEST_CASE("rect geometric invariants on random boxes") {
    Rng rng(42);
    for (int t = 0; t < 2000; ++t) {
        const int d = 1 + static_cast<int>(rng.uniform_int(4));
        const HyperRect r = random_rect(rng, d);
        const auto g = rect_geometry(r);
        CHECK(g.h_minus <= g.h_plus);
        CHECK(g.diameter >= g.h_plus * (1.0 - 1e-15));
        CHECK(g.volume <= powint(g.h_plus, d) * (1.0 + 1e-12));
        CHECK(g.volume >= powint(g.h_minus, d) * (1.0 - 1e-12));
    }
}

TEST_CASE("half-open containment with domain-edge closure") {
    HyperRect cell({0.0, 0.5}, {0.5, 1.0}, true);
    const std::vector<double> corner{0.0, 0.6};
    CHECK(cell.contains(corner)); // lower face on the domain origin stays closed
    const std::vector<double> on_open_face{0.2, 0.5};
    CHECK_FALSE(cell.contains(on_open_face));
    const std::vector<double> on_closed_face{0.5, 0.6};
    CHECK(cell.contains(on_closed_face));
}

TEST_CASE("local_average") {
    const Dataset data = make_data({0.1, 0.2, 0.8}, {1.0, 3.0, 7.0}, 1);
    SUBCASE("empty cell gives exactly 0") {
        CHECK(local_average(data, Cell{HyperRect({0.4}, {0.6})}) == 0.0);
    }
    SUBCASE("single point") {
        const Dataset one = make_data({0.3}, {5.0}, 1);
        CHECK(local_average(one, Cell{HyperRect({0.0}, {1.0})}) == 5.0);
    }
    SUBCASE("two-point mean") {
        CHECK(local_average(data, Cell{HyperRect({0.0}, {0.5})}) == 2.0);
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS_AS(local_average(data, Cell{HyperRect::unit_cube(2)}),
                        std::invalid_argument);
    }
}

TEST_CASE("local_average permutation invariance and constant exactness") {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng.uniform_int(40));
        std::vector<double> x, y;
        for (int i = 0; i < n; ++i) {
            x.push_back(rng.uniform());
            y.push_back(rng.uniform() * 10 - 5);
        }
        const Cell cell{HyperRect({0.2}, {0.9})};
        const double base = local_average(make_data(x, y, 1), cell);

        // permute rows
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
        std::vector<double> px(n), py(n);
        for (int i = 0; i < n; ++i) {
            px[i] = x[perm[i]];
            py[i] = y[perm[i]];
        }
        CHECK(local_average(make_data(px, py, 1), cell) == base);

        // constant responses
        const double c = rng.uniform() * 100 - 50;
        std::vector<double> yc(n, c);
        const double got = local_average(make_data(x, yc, 1), Cell{HyperRect({0.0}, {1.0})});
        CHECK(got == c);
    }
}

TEST_CASE("empirical_mass") {
    const Dataset data = make_data({0.1, 0.2, 0.6, 0.9}, {0, 0, 0, 0}, 1);
    CHECK(empirical_mass(data, Cell{HyperRect({0.0}, {0.3})}) == 0.5);
    CHECK(empirical_mass(data, Cell{HyperRect({0.35}, {0.45})}) == 0.0);
    CHECK(empirical_mass(data, Cell{HyperRect({0.0}, {1.0})}) == 1.0);
    const Dataset empty = make_data({}, {}, 1);
    CHECK_THROWS_AS(empirical_mass(empty, Cell{HyperRect({0.0}, {1.0})}),
                    std::invalid_argument);
}

TEST_CASE("ball cell geometry identity") {
    // diam^d * V_d == 2^d * volume must hold bit-exactly
    Rng rng(3);
    for (int t = 0; t < 500; ++t) {
        const int d = 1 + static_cast<int>(rng.uniform_int(4));
        BallCell ball{std::vector<double>(d, 0.5), rng.uniform()};
        const double lhs = powint(ball.diameter(), d) * unit_ball_volume(d);
        const double rhs = powint(2.0, d) * ball.volume();
        CHECK(lhs == rhs);
    }
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(2) == doctest::Approx(3.14159265358979323846));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 / 3.0 * 3.14159265358979323846));
}

TEST_CASE("voronoi_cell_estimate") {
    const HyperRect domain = HyperRect::unit_cube(2);
    SUBCASE("single site covers the whole domain") {
        auto sites = std::make_shared<const std::vector<double>>(std::vector<double>{0.5, 0.5});
        VoronoiCellRef cell{sites, 1, 2, 0};
        const auto est = voronoi_cell_estimate(cell, domain, 2000, 1);
        CHECK(est.volume_est == 1.0);
        CHECK_FALSE(est.degenerate);
    }
    SUBCASE("two symmetric sites halve the square") {
        auto sites = std::make_shared<const std::vector<double>>(
            std::vector<double>{0.25, 0.5, 0.75, 0.5});
        VoronoiCellRef cell{sites, 2, 2, 0};
        const auto est = voronoi_cell_estimate(cell, domain, 4000, 2);
        CHECK(std::abs(est.volume_est - 0.5) <= 3.0 * est.std_err);
    }
    SUBCASE("three collinear sites in d=1") {
        auto sites = std::make_shared<const std::vector<double>>(
            std::vector<double>{0.0, 0.5, 1.0});
        VoronoiCellRef cell{sites, 3, 1, 1};
        const auto est = voronoi_cell_estimate(cell, HyperRect::unit_cube(1), 4000, 3);
        CHECK(std::abs(est.volume_est - 0.5) <= 3.0 * est.std_err);
    }
    SUBCASE("cell volumes sum to the domain volume") {
        Rng rng(9);
        const std::size_t m = 5;
        std::vector<double> pts;
        for (std::size_t j = 0; j < 2 * m; ++j) pts.push_back(rng.uniform());
        auto sites = std::make_shared<const std::vector<double>>(std::move(pts));
        double total = 0.0, pooled_var = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto est =
                voronoi_cell_estimate(VoronoiCellRef{sites, m, 2, j}, domain, 4000, 100 + j);
            total += est.volume_est;
            pooled_var += est.std_err * est.std_err;
        }
        CHECK(std::abs(total - 1.0) <= 3.0 * std::sqrt(pooled_var) + 1e-9);
    }
    SUBCASE("degenerate cell flagged") {
        // site 0 is dominated everywhere inside the domain
        auto sites = std::make_shared<const std::vector<double>>(
            std::vector<double>{-5.0, 0.5, 0.5, 0.5});
        VoronoiCellRef cell{sites, 2, 2, 0};
        const auto est = voronoi_cell_estimate(cell, domain, 500, 4);
        CHECK(est.degenerate);
        CHECK(est.volume_est == 0.0);
        CHECK(est.diameter_est == 0.0);
    }
    SUBCASE("n_mc below 100 rejected") {
        auto sites = std::make_shared<const std::vector<double>>(std::vector<double>{0.5, 0.5});
        CHECK_THROWS_AS(voronoi_cell_estimate(VoronoiCellRef{sites, 1, 2, 0}, domain, 50, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("clipped_ball_volume for boundary diagnostics") {
    const HyperRect domain = HyperRect::unit_cube(2);
    SUBCASE("interior ball is unclipped") {
        BallCell ball{{0.5, 0.5}, 0.2};
        const double est = clipped_ball_volume(ball, domain, 20000, 7);
        CHECK(est == doctest::Approx(ball.volume()).epsilon(0.05));
    }
    SUBCASE("corner ball keeps a quarter of its volume") {
        BallCell ball{{0.0, 0.0}, 0.2};
        const double est = clipped_ball_volume(ball, domain, 20000, 8);
        CHECK(est == doctest::Approx(ball.volume() / 4.0).epsilon(0.08));
        CHECK(ball.volume() > est); // reported volume stays unclipped
    }
}

TEST_CASE("voronoi tie-breaking favors the larger site index") {
    auto sites = std::make_shared<const std::vector<double>>(std::vector<double>{0.25, 0.75});
    VoronoiCellRef left{sites, 2, 1, 0}, right{sites, 2, 1, 1};
    const std::vector<double> mid{0.5};
    CHECK_FALSE(left.contains(mid));
    CHECK(right.contains(mid));
}

TEST_CASE("derive_seed is stable") {
    // pinned: the documented SplitMix64 chain must never change silently
    CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 3, 5));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(2, 2, 3, 4));
}
