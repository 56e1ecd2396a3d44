#include <doctest.h>

#include <set>

#include "trendcast/dataset.hpp"

using namespace trendcast;

TEST_SUITE_BEGIN("dataset");

TEST_CASE("parse minimal weekly csv") {
    const std::string csv = "date,flu\n2018-01-01,10\n2018-01-08,20\n2018-01-15,30\n";
    Dataset d = parse_trends_csv(csv);
    CHECK(d.rows() == 3);
    CHECK(d.cols() == 1);
    CHECK(d.names == std::vector<std::string>{"flu"});
    CHECK(d.roles[0] == SeriesRole::Predictor);
    CHECK(d.values(1, 0) == 20.0);
    CHECK(format_iso_date(d.start_week) == "2018-01-01");
}

TEST_CASE("gap in weekly sampling is rejected") {
    const std::string csv = "date,flu\n2018-01-01,10\n2018-01-15,30\n";
    CHECK_THROWS_WITH_AS(parse_trends_csv(csv),
                         doctest::Contains("gap in weekly sampling"), std::invalid_argument);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_trends_csv("date,flu\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_trends_csv("week,flu\n2018-01-01,1\n2018-01-08,2\n"),
                    std::invalid_argument);
    // non-monotone dates
    CHECK_THROWS_AS(parse_trends_csv("date,flu\n2018-01-08,1\n2018-01-01,2\n"),
                    std::invalid_argument);
    // non-numeric cell
    CHECK_THROWS_AS(parse_trends_csv("date,flu\n2018-01-01,1\n2018-01-08,x\n"),
                    std::invalid_argument);
    // duplicate column names
    CHECK_THROWS_AS(parse_trends_csv("date,flu,flu\n2018-01-01,1,2\n2018-01-08,2,3\n"),
                    std::invalid_argument);
}

TEST_CASE("full-panel fixture span: 261 iso weeks, 21 columns") {
    // Oracle: count Monday-spaced samples from 2013-12-02 through 2018-11-26.
    std::int64_t first = parse_iso_date("2013-12-02");
    std::int64_t last = parse_iso_date("2018-11-26");
    CHECK((last - first) % 7 == 0);
    CHECK((last - first) / 7 + 1 == 261);
}

TEST_CASE("csv round-trip is byte-stable") {
    const std::string csv = "date,a,b\n2018-01-01,10,0.5\n2018-01-08,20,1.25\n2018-01-15,3,99\n";
    Dataset d = parse_trends_csv(csv);
    const std::string once = to_trends_csv(d);
    Dataset d2 = parse_trends_csv(once);
    CHECK(to_trends_csv(d2) == once);
    CHECK(d2.values == d.values);
}

TEST_CASE("dataset json round-trip") {
    Dataset d = parse_trends_csv("date,a,b\n2018-01-01,1,4\n2018-01-08,2,5\n2018-01-15,3,6\n");
    d.set_targets({"b"});
    Dataset d2 = dataset_from_json(dataset_to_json(d));
    CHECK(d2.names == d.names);
    CHECK(d2.roles == d.roles);
    CHECK(d2.values == d.values);
    CHECK(d2.start_week == d.start_week);
}

TEST_CASE("zscore fit: hand-computed stats") {
    Dataset d;
    d.names = {"s"};
    d.roles = {SeriesRole::Predictor};
    d.values.resize(3, 1);
    d.values << 0, 10, 20;

    auto p = zscore_fit(d, {0, 1, 2});
    CHECK(p.at("s").mean == doctest::Approx(10.0));
    CHECK(p.at("s").sd == doctest::Approx(std::sqrt(200.0 / 3.0)));

    // First two rows only: mean 5, population sd 5.
    auto p2 = zscore_fit(d, {0, 1});
    CHECK(p2.at("s").mean == doctest::Approx(5.0));
    CHECK(p2.at("s").sd == doctest::Approx(5.0));
}

TEST_CASE("zscore rejects constant series") {
    Dataset d;
    d.names = {"s"};
    d.roles = {SeriesRole::Predictor};
    d.values.resize(3, 1);
    d.values << 5, 5, 5;
    CHECK_THROWS_WITH_AS(zscore_fit(d, {0, 1, 2}), doctest::Contains("zero variance"),
                         std::invalid_argument);
}

TEST_CASE("zscore apply and invert round-trip") {
    Dataset d;
    d.names = {"s"};
    d.roles = {SeriesRole::Predictor};
    d.values.resize(3, 1);
    d.values << 0, 10, 20;
    NormParams p;
    p.stats["s"] = {10.0, 10.0};

    Dataset z = zscore_apply(d, p);
    CHECK(z.values(0, 0) == doctest::Approx(-1.0));
    CHECK(z.values(1, 0) == doctest::Approx(0.0));
    CHECK(z.values(2, 0) == doctest::Approx(1.0));

    std::vector<double> zs(z.values.col(0).data(), z.values.col(0).data() + 3);
    auto back = zscore_invert(zs, p, "s");
    for (int i = 0; i < 3; ++i) {
        CHECK(back[static_cast<std::size_t>(i)] ==
              doctest::Approx(d.values(i, 0)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(zscore_invert(zs, p, "nope"), std::invalid_argument);
}

TEST_CASE("zscore statistics ignore rows outside the fit subset") {
    Dataset d;
    d.names = {"s"};
    d.roles = {SeriesRole::Predictor};
    d.values.resize(4, 1);
    d.values << 1, 2, 3, 100;
    auto p1 = zscore_fit(d, {0, 1, 2});
    d.values(3, 0) = -999;  // perturb a row outside the subset
    auto p2 = zscore_fit(d, {0, 1, 2});
    CHECK(p1.at("s").mean == p2.at("s").mean);
    CHECK(p1.at("s").sd == p2.at("s").sd);
}

TEST_CASE("fold plan: full-panel dimensions") {
    FoldPlan plan = make_fold_plan(261, 52, 5);
    CHECK(plan.assignments.size() == 209);
    std::map<int, int> sizes;
    for (int f : plan.assignments) sizes[f]++;
    std::multiset<int> observed;
    for (auto& [f, n] : sizes) observed.insert(n);
    CHECK(observed == std::multiset<int>{41, 42, 42, 42, 42});
}

TEST_CASE("fold plan: blocks are contiguous, disjoint, and cover [L, T)") {
    FoldPlan plan = make_fold_plan(47, 9, 4);
    std::set<Eigen::Index> seen;
    for (int f = 0; f < plan.k; ++f) {
        auto idx = plan.indices_in_fold(f);
        REQUIRE(!idx.empty());
        for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] == idx[i - 1] + 1);
        for (auto t : idx) {
            CHECK(t >= 9);
            CHECK(t < 47);
            CHECK(seen.insert(t).second);
        }
    }
    CHECK(seen.size() == 47 - 9);
}

TEST_CASE("fold plan: trivial and error cases") {
    FoldPlan plan = make_fold_plan(10, 0, 5);
    for (int f = 0; f < 5; ++f) CHECK(plan.indices_in_fold(f).size() == 2);
    CHECK_THROWS_AS(make_fold_plan(7, 5, 5), std::invalid_argument);
    CHECK_THROWS_AS(make_fold_plan(100, 0, 1), std::invalid_argument);
}

TEST_SUITE_END();
