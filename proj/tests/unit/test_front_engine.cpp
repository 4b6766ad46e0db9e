#include <sstream>

#include "doctest.h"
#include "dendrite/front_engine.hpp"
#include "test_support.hpp"

using namespace dendrite;
using testsupport::random_cloud;

TEST_CASE("single impulse: unobstructed fronts")
{
    PointCloud cloud({{0.0, 0.4}}, 1.0);
    auto tr = simulate_fronts(cloud, 5.0);
    REQUIRE(tr.soma_hits.size() == 1);
    REQUIRE(tr.far_exits.size() == 1);
    CHECK(tr.soma_hits[0] == doctest::Approx(0.4));
    CHECK(tr.far_exits[0] == doctest::Approx(0.6));
    CHECK(tr.annihilations.empty());
    CHECK(tr.conserved());
}

TEST_CASE("two impulses: hand geometry")
{
    // negative front of (0, 0.2) climbs, positive front of (0, 0.8) descends;
    // they meet half way at x = 0.5 after 0.3 time units
    PointCloud cloud({{0.0, 0.2}, {0.0, 0.8}}, 1.0);
    auto tr = simulate_fronts(cloud, 5.0);
    REQUIRE(tr.annihilations.size() == 1);
    CHECK(tr.annihilations[0].time == doctest::Approx(0.3));
    CHECK(tr.annihilations[0].x == doctest::Approx(0.5));
    CHECK(tr.annihilations[0].negative_id == negative_front_id(0));
    CHECK(tr.annihilations[0].positive_id == positive_front_id(1));
    REQUIRE(tr.soma_hits.size() == 1);
    CHECK(tr.soma_hits[0] == doctest::Approx(0.2));
    REQUIRE(tr.far_exits.size() == 1);
    CHECK(tr.far_exits[0] == doctest::Approx(0.2));
    CHECK(tr.alive == 0);
    REQUIRE(tr.events.size() == 5);
    // soma hit and far exit are both near t = 0.2; rounding decides their order
    CHECK(tr.events[2].kind != tr.events[3].kind);
    CHECK(tr.events[2].kind != FrontEventKind::annihilation);
    CHECK(tr.events[3].kind != FrontEventKind::annihilation);
    CHECK(tr.events[4].kind == FrontEventKind::annihilation);
}

TEST_CASE("horizon truncates events and keeps conservation")
{
    PointCloud cloud({{0.0, 0.2}, {0.0, 0.8}, {0.9, 0.1}}, 1.0);
    auto tr = simulate_fronts(cloud, 0.25);
    CHECK(tr.impulse_count == 2);
    CHECK(tr.soma_hits.size() == 1);
    CHECK(tr.alive == 2);
    CHECK(tr.conserved());
}

TEST_CASE("soma hits before t equal A_t on 500 random clouds")
{
    SplitMix rng(21);
    for (int k = 0; k < 500; ++k) {
        auto cloud = random_cloud(rng, 1 + static_cast<std::size_t>(rng.uniform() * 200));
        auto tr = simulate_fronts(cloud, 3.0);
        CHECK(tr.conserved());
        for (int q = 0; q < 10; ++q) {
            double t = 2.0 * rng.uniform();
            CHECK(tr.hits_before(t) == lis_count_before(cloud, t));
        }
        CHECK(tr.soma_hits.size() == lis_count(cloud));
    }
}

TEST_CASE("streaming replay is identical to the batch trace")
{
    SplitMix rng(22);
    for (int k = 0; k < 200; ++k) {
        auto cloud = random_cloud(rng, 1 + static_cast<std::size_t>(rng.uniform() * 150), 1.0, 0.5 + rng.uniform());
        double horizon = 3.0 * rng.uniform();
        auto batch = simulate_fronts(cloud, horizon);
        auto stream = stream_fronts(cloud, horizon);
        REQUIRE(batch.events.size() == stream.events.size());
        bool same = true;
        for (std::size_t i = 0; i < batch.events.size(); ++i) same = same && batch.events[i] == stream.events[i];
        CHECK(same);
        CHECK(batch.soma_hits == stream.soma_hits);
        CHECK(batch.far_exits == stream.far_exits);
        CHECK(batch.alive == stream.alive);
        CHECK(batch.impulse_count == stream.impulse_count);
    }
}

TEST_CASE("streaming conservation after every advance and next-hit prediction")
{
    SplitMix rng(23);
    for (int k = 0; k < 100; ++k) {
        auto cloud = random_cloud(rng, 120);
        StreamingEngine eng(1.0, 1.0);
        std::size_t pushed = 0;
        for (const auto& p : cloud.impulses()) {
            eng.push_impulse(p.t, p.x);
            ++pushed;
            CHECK(eng.conserved());
            // with no further impulses, the batch run of the prefix decides the next hit
            if (pushed % 10 == 0) {
                std::vector<Impulse> prefix(cloud.impulses().begin(), cloud.impulses().begin() + pushed);
                auto tr = simulate_fronts(PointCloud(prefix, 1.0), 10.0);
                double expected = std::numeric_limits<double>::infinity();
                for (double h : tr.soma_hits)
                    if (h > p.t) {
                        expected = h;
                        break;
                    }
                CHECK(eng.next_soma_hit() == expected);
            }
        }
        std::vector<double> hits;
        double t = eng.now();
        while (t < 3.0) {
            t += 0.05;
            eng.advance_to(t, &hits);
            CHECK(eng.conserved());
        }
        CHECK(eng.soma_hit_count() == lis_count(cloud));
        CHECK(eng.alive() == 0);
    }
}

TEST_CASE("streaming preconditions")
{
    StreamingEngine eng(1.0, 1.0);
    CHECK(eng.advance_to(0.0) == 0);
    CHECK(std::isinf(eng.next_soma_hit()));
    eng.push_impulse(0.5, 0.5);
    CHECK_THROWS_AS(eng.push_impulse(0.25, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(eng.push_impulse(0.6, 1.5), std::invalid_argument);
    // the positive front of (0.5, 0.5) sits at 0.25 at time 0.75
    CHECK_THROWS_AS(eng.push_impulse(0.75, 0.25), SimultaneousEventError);
    CHECK(eng.next_soma_hit() == 1.0);
    std::vector<double> hits;
    CHECK(eng.advance_to(1.0, &hits) == 1);
    CHECK(hits == std::vector<double>{1.0});
}

TEST_CASE("trace csv")
{
    PointCloud cloud({{0.0, 0.2}, {0.0, 0.8}}, 1.0);
    std::stringstream ss;
    write_trace_csv(ss, simulate_fronts(cloud, 1.0));
    std::string header;
    std::getline(ss, header);
    CHECK(header == "time,kind,x,front_id");
    int rows = 0;
    for (std::string line; std::getline(ss, line);) ++rows;
    // two rows per birth and per annihilation
    CHECK(rows == 8);
}
