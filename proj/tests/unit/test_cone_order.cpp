#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "dendrite/cone_order.hpp"
#include "test_support.hpp"

using namespace dendrite;
using testsupport::random_cloud;

TEST_CASE("cone order on hand examples")
{
    CHECK(precedes({0.0, 0.5}, {1.0, 0.5}, 1.0));
    CHECK_FALSE(precedes({0.0, 0.0}, {0.3, 0.5}, 1.0));
    CHECK(precedes({0.0, 0.0}, {0.5, 0.25}, 1.0));
    CHECK_FALSE(precedes({1.0, 0.5}, {0.0, 0.5}, 1.0));
}

TEST_CASE("psi is an order isomorphism on random pairs")
{
    SplitMix rng(1);
    int agree = 0;
    for (int k = 0; k < 100000; ++k) {
        double rho = 0.5 + 2.0 * rng.uniform();
        Impulse p{rng.uniform(), rng.uniform()};
        Impulse q{rng.uniform(), rng.uniform()};
        auto a = psi(p, rho);
        auto b = psi(q, rho);
        bool dominance = a.u <= b.u && a.v <= b.v;
        agree += dominance == precedes(p, q, rho);
        CHECK(a.u + a.v == doctest::Approx(2 * rho * p.t));
        CHECK(a.v - a.u == doctest::Approx(2 * p.x));
    }
    CHECK(agree == 100000);
}

TEST_CASE("trivial clouds")
{
    PointCloud empty({}, 1.0);
    CHECK(lis_count(empty) == 0);
    CHECK(lis_brute_force(empty) == 0);
    CHECK(layer_decomposition(empty).empty());
    PointCloud one({{0.3, 0.4}}, 1.0);
    CHECK(lis_count(one) == 1);
    CHECK(lis_brute_force(one) == 1);
    auto layers = layer_decomposition(one);
    REQUIRE(layers.size() == 1);
    CHECK(layers[0].size() == 1);

    PointCloud chain({{0.0, 0.5}, {1.0, 0.5 + 0.125}, {2.0, 0.5}, {3.0, 0.25}}, 1.0);
    CHECK(lis_count(chain) == 4);
    auto chain_layers = layer_decomposition(chain);
    CHECK(chain_layers.size() == 4);
    for (const auto& l : chain_layers) CHECK(l.size() == 1);
}

TEST_CASE("general position is enforced with the offending pair")
{
    try {
        PointCloud bad({{0.0, 0.25}, {0.1, 0.9}, {0.5, 0.75}}, 1.0);
        FAIL("expected rejection");
    } catch (const GeneralPositionError& e) {
        CHECK(e.first == 0);
        CHECK(e.second == 2);
    }
    CHECK_THROWS_AS(PointCloud({{0.5, 0.5}, {0.5, 0.5}}, 1.0), GeneralPositionError);
    // mirrored ray: |x_j - x_i| = rho |t_j - t_i| with x decreasing
    CHECK_THROWS_AS(PointCloud({{0.0, 0.75}, {0.25, 0.5}}, 1.0), GeneralPositionError);
    CHECK_THROWS_AS(PointCloud({{0.0, 1.5}}, 1.0), std::invalid_argument);
}

TEST_CASE("patience, brute force and layers agree on 500 random clouds")
{
    SplitMix rng(2);
    for (int k = 0; k < 500; ++k) {
        auto cloud = random_cloud(rng, 1 + static_cast<std::size_t>(rng.uniform() * 60));
        auto a = lis_count(cloud);
        CHECK(a == lis_brute_force(cloud));
        CHECK(a == layer_decomposition(cloud).size());
    }
}

TEST_CASE("layers are antichains and each layer is supported by the previous one")
{
    SplitMix rng(3);
    for (int k = 0; k < 100; ++k) {
        auto cloud = random_cloud(rng, 50, 1.0, 0.5 + rng.uniform());
        auto layers = layer_decomposition(cloud);
        std::size_t total = 0;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            total += layers[l].size();
            for (auto i : layers[l])
                for (auto j : layers[l])
                    if (i != j) CHECK_FALSE(precedes(cloud[i], cloud[j], cloud.rho()));
            if (l == 0) continue;
            for (auto j : layers[l]) {
                bool supported = std::any_of(layers[l - 1].begin(), layers[l - 1].end(),
                                             [&](std::size_t i) { return precedes(cloud[i], cloud[j], cloud.rho()); });
                CHECK(supported);
            }
        }
        CHECK(total == cloud.size());
    }
}

TEST_CASE("A_t is monotone in t and saturates")
{
    SplitMix rng(4);
    for (int k = 0; k < 50; ++k) {
        auto cloud = random_cloud(rng, 80);
        std::size_t prev = 0;
        double t_end = 0.0;
        for (const auto& p : cloud.impulses()) t_end = std::max(t_end, p.t);
        t_end += cloud.L() / cloud.rho();
        for (int i = 0; i <= 100; ++i) {
            double t = 2.2 * i / 100.0;
            auto a = lis_count_before(cloud, t);
            CHECK(a >= prev);
            prev = a;
        }
        CHECK(lis_count_before(cloud, t_end) == lis_count(cloud));
        CHECK(lis_count_before(cloud, 0.0) == 0);
    }
    PointCloud at_origin({{0.0, 0.0}, {0.5, 0.25}}, 1.0);
    CHECK(lis_count_before(at_origin, 0.0) == 1);
}

TEST_CASE("lis_profile equals pointwise recomputation")
{
    SplitMix rng(5);
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(0.05 * i);
    for (int k = 0; k < 50; ++k) {
        auto cloud = random_cloud(rng, 100);
        auto prof = lis_profile(cloud, grid);
        REQUIRE(prof.size() == grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(prof[i] == lis_count_before(cloud, grid[i]));
    }
    PointCloud one({{0.1, 0.1}}, 1.0);
    CHECK(lis_profile(one, {0.0}) == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(lis_profile(one, {0.5, 0.2}), std::invalid_argument);
}

TEST_CASE("adding an impulse never decreases A or A_t")
{
    SplitMix rng(6);
    for (int k = 0; k < 200; ++k) {
        auto cloud = random_cloud(rng, 40);
        auto pts = cloud.impulses();
        pts.push_back({rng.uniform(), 1.0 - std::sqrt(1.0 - rng.uniform())});
        PointCloud bigger(pts, cloud.rho());
        CHECK(lis_count(bigger) >= lis_count(cloud));
        for (double t : {0.2, 0.6, 1.0, 1.5}) CHECK(lis_count_before(bigger, t) >= lis_count_before(cloud, t));
    }
}

TEST_CASE("brute force size guard")
{
    SplitMix rng(7);
    auto cloud = random_cloud(rng, 20);
    CHECK_THROWS_AS(lis_brute_force(cloud, 10), std::length_error);
}

TEST_CASE("cloud csv round trip and ordering gate")
{
    SplitMix rng(8);
    auto cloud = random_cloud(rng, 30);
    std::stringstream ss;
    write_cloud_csv(ss, cloud);
    auto back = PointCloud::from_sorted(read_impulses_csv(ss), 1.0);
    CHECK(back.impulses() == cloud.impulses());

    std::stringstream unsorted("t,x\n0.5,0.1\n0.2,0.3\n");
    CHECK_THROWS_AS(PointCloud::from_sorted(read_impulses_csv(unsorted), 1.0), std::invalid_argument);
}
