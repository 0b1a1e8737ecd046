#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sbp/gauss.hpp"
#include "sbp/io.hpp"
#include "sbp/model.hpp"
#include "sbp/rng.hpp"

using namespace sbp;

namespace {

Instance toy_instance() {
    Instance inst;
    inst.services = {{"a", 2.0, 1.0, 6.0}};
    inst.cluster.capacity = 10.0;
    inst.cluster.initial = CountMatrix(1, 1);
    inst.request.demands = {3};
    return inst;
}

}  // namespace

TEST_CASE("validate accepts a trivially consistent instance") {
    Confidence conf = Confidence::from_alpha(0.99);
    CHECK(validate_instance(toy_instance(), conf).ok());
}

TEST_CASE("validate reports negative mean") {
    Instance inst = toy_instance();
    inst.services[0].mean = -1.0;
    inst.services[0].limit = 6.0;
    Confidence conf = Confidence::from_alpha(0.99);
    ValidationReport rep = validate_instance(inst, conf);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.to_string().find("mean must be positive") != std::string::npos);
}

TEST_CASE("validate flags an initially infeasible machine") {
    // Packed right at capacity for D=2, then checked at a higher confidence.
    Instance inst;
    inst.services = {{"a", 2.0, 1.0, 6.0}};
    inst.cluster.capacity = 10.0;
    inst.cluster.initial = CountMatrix(2, 1);
    inst.cluster.initial(1, 0) = 3;  // 6 + D*sqrt(3)
    inst.request.demands = {0};

    Confidence d2{normal_cdf(2.0), 2.0};
    CHECK(feasible(machine_load(inst.cluster.initial.row(1), inst.services), d2, 10.0));
    CHECK(validate_instance(inst, d2).ok());

    Confidence d3{normal_cdf(3.0), 3.0};  // 6 + 3*sqrt(3) = 11.2 > 10
    ValidationReport rep = validate_instance(inst, d3);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.to_string().find("machine 1 initially infeasible") != std::string::npos);
}

TEST_CASE("validate lists every violation, not just the first") {
    Instance inst = toy_instance();
    inst.services[0].mean = -1.0;
    inst.cluster.capacity = -5.0;
    Confidence conf = Confidence::from_alpha(0.99);
    CHECK(validate_instance(inst, conf).errors.size() >= 2);
}

TEST_CASE("apply_placement adds allocations") {
    ClusterState cluster;
    cluster.capacity = 10.0;
    cluster.initial = CountMatrix(3, 2);
    cluster.initial(2, 0) = 2;

    Placement p{CountMatrix(3, 2)};
    p.alloc(0, 0) = 3;
    p.alloc(2, 0) = 1;

    ClusterState out = apply_placement(cluster, p);
    CHECK(out.initial(0, 0) == 3);
    CHECK(out.initial(2, 0) == 3);
    CHECK(out.capacity == 10.0);

    Placement zero{CountMatrix(3, 2)};
    CHECK(apply_placement(cluster, zero).initial == cluster.initial);

    Placement bad{CountMatrix(2, 2)};
    CHECK_THROWS_AS(apply_placement(cluster, bad), SolveError);
}

TEST_CASE("diff_totals splits into allocations and deletions") {
    {
        std::vector<int> target = {10, 4}, current = {6, 4};
        LayoutDiff d = diff_totals(target, current);
        CHECK(d.allocations.demands == std::vector<int>{4, 0});
        CHECK(d.deletions == std::vector<int>{0, 0});
    }
    {
        std::vector<int> target = {3}, current = {5};
        LayoutDiff d = diff_totals(target, current);
        CHECK(d.allocations.demands == std::vector<int>{0});
        CHECK(d.deletions == std::vector<int>{2});
    }
    {
        std::vector<int> same = {7, 7};
        LayoutDiff d = diff_totals(same, same);
        CHECK(d.allocations.demands == std::vector<int>{0, 0});
        CHECK(d.deletions == std::vector<int>{0, 0});
    }
}

TEST_CASE("apply then diff against the target is all zero") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        int n = 1 + rng.uniform_int(5), k = 1 + rng.uniform_int(4);
        ClusterState cluster;
        cluster.capacity = 100.0;
        cluster.initial = CountMatrix(n, k);
        Placement p{CountMatrix(n, k)};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) {
                cluster.initial(i, j) = rng.uniform_int(4);
                p.alloc(i, j) = rng.uniform_int(4);
            }
        ClusterState after = apply_placement(cluster, p);
        LayoutDiff d = diff_layouts(after.initial, after.initial);
        for (int j = 0; j < k; ++j) {
            CHECK(d.allocations.demands[j] == 0);
            CHECK(d.deletions[j] == 0);
        }
    }
}

TEST_CASE("random container removal picks victims proportionally to counts") {
    CountMatrix layout(2, 1);
    layout(0, 0) = 90;
    layout(1, 0) = 10;
    Rng rng(99);
    remove_containers_random(layout, 0, 50, rng);
    CHECK(layout(0, 0) + layout(1, 0) == 50);
    // Machine 0 held 90% of the containers, so it loses the bulk of them.
    CHECK(layout(0, 0) < 60);
    CHECK(layout(1, 0) <= 10);

    CountMatrix empty(1, 1);
    Rng rng2(1);
    CHECK_THROWS_AS(remove_containers_random(empty, 0, 1, rng2), SolveError);
}

TEST_CASE("instance and placement JSON round-trips are the identity") {
    Instance inst;
    inst.services = {{"a", 2.0, 1.0, 6.0}, {"b", 3.5, 0.25, 5.0}};
    inst.cluster.capacity = 31.58;
    inst.cluster.initial = CountMatrix(3, 2);
    inst.cluster.initial(0, 0) = 4;
    inst.cluster.initial(2, 1) = 1;
    inst.request.demands = {5, 0};

    Instance back = io::decode_instance(io::encode_instance(inst));
    CHECK(back.cluster.capacity == inst.cluster.capacity);
    CHECK(back.cluster.initial == inst.cluster.initial);
    CHECK(back.request.demands == inst.request.demands);
    REQUIRE(back.services.size() == inst.services.size());
    for (std::size_t j = 0; j < inst.services.size(); ++j) {
        CHECK(back.services[j].id == inst.services[j].id);
        CHECK(back.services[j].mean == inst.services[j].mean);
        CHECK(back.services[j].uncertainty == inst.services[j].uncertainty);
        CHECK(back.services[j].limit == inst.services[j].limit);
    }

    Placement p{inst.cluster.initial};
    CHECK(io::decode_placement(io::encode_placement(p)).alloc == p.alloc);
}

TEST_CASE("pattern cache round-trips and rejects foreign fingerprints") {
    std::vector<ServiceSpec> svcs = {{"a", 2.0, 1.0, 6.0}, {"b", 3.0, 0.0, 4.0}};
    Confidence conf{normal_cdf(2.0), 2.0};
    PatternSet set = initial_patterns(svcs, conf, 10.0);

    io::json doc = io::encode_pattern_cache(set, 10.0, conf.alpha, svcs);
    PatternSet back;
    REQUIRE(io::decode_pattern_cache(doc, 10.0, conf.alpha, svcs, &back));
    REQUIRE(back.size() == set.size());
    for (int i = 0; i < set.size(); ++i) {
        CHECK(back[i].counts == set[i].counts);
        CHECK(back[i].ucac == set[i].ucac);
    }

    // Different alpha or capacity -> cache miss.
    CHECK_FALSE(io::decode_pattern_cache(doc, 10.0, 0.99, svcs, &back));
    CHECK_FALSE(io::decode_pattern_cache(doc, 12.0, conf.alpha, svcs, &back));
    std::vector<ServiceSpec> other = svcs;
    other[0].mean = 2.5;
    CHECK_FALSE(io::decode_pattern_cache(doc, 10.0, conf.alpha, other, &back));
}

TEST_CASE("decode errors carry a field path") {
    io::json j = {{"capacity", 10.0}, {"services", io::json::array()}, {"initial", io::json::array()}};
    // missing request
    CHECK_THROWS_WITH_AS(io::decode_instance(j), doctest::Contains("instance.request"), SolveError);

    io::json bad = io::encode_instance(Instance{{{"a", 1.0, 0.0, 2.0}}, {}, {}});
    bad["services"][0].erase("mean");
    CHECK_THROWS_WITH_AS(io::decode_instance(bad), doctest::Contains("services[0]"), SolveError);
}
