#include <doctest.h>

#include <cmath>

#include "seepline/errors.hpp"
#include "seepline/metrics.hpp"

using namespace seepline;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("rmse of a fixed error pattern") {
    CHECK(rmse(vec({0, 0}), vec({3, 4})) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
    CHECK(rmse(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
}

TEST_CASE("mape in percent") {
    CHECK(mape(vec({100}), vec({110})) == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(mape(vec({100, 50}), vec({110, 45})) == doctest::Approx(10.0).epsilon(1e-13));
}

TEST_CASE("mape guards against near-zero truth") {
    CHECK_THROWS_AS(mape(vec({0.0, 1.0}), vec({1.0, 1.0})), ZeroDenominatorError);
    CHECK_THROWS_AS(mape(vec({1e-9}), vec({1.0})), ZeroDenominatorError);
    try {
        mape(vec({1.0, 1e-12, 2.0}), vec({1.0, 1.0, 2.0}));
        FAIL("expected throw");
    } catch (const ZeroDenominatorError& e) {
        CHECK(e.index == 1);
    }
}

TEST_CASE("r2 matches the hand-computed value") {
    // truth 1,2,3 (SS_tot=2), pred 1,2,4 (SS_res=1) -> 0.5
    CHECK(r2(vec({1, 2, 3}), vec({1, 2, 4})) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r2(vec({1, 2, 3}), vec({1, 2, 3})) == 1.0);
}

TEST_CASE("r2 of the mean predictor is zero and worse is negative") {
    auto truth = vec({1, 2, 3, 4});
    CHECK(r2(truth, vec({2.5, 2.5, 2.5, 2.5})) == doctest::Approx(0.0));
    CHECK(r2(truth, vec({4, 3, 2, 1})) < 0.0);
}

TEST_CASE("constant truth makes r2 undefined") {
    CHECK_THROWS_AS(r2(vec({2, 2, 2}), vec({1, 2, 3})), DegenerateVarianceError);
}

TEST_CASE("length mismatches are schema errors") {
    CHECK_THROWS_AS(rmse(vec({1}), vec({1, 2})), SchemaError);
    CHECK_THROWS_AS(mape(vec({1}), vec({1, 2})), SchemaError);
    CHECK_THROWS_AS(r2(vec({1}), vec({1, 2})), SchemaError);
    CHECK_THROWS_AS(rmse(vec({}), vec({})), InsufficientDataError);
}

TEST_CASE("report renders csv and markdown with one row per station") {
    EvalReport rep;
    rep.rows.push_back(EvalRow{"no8", "cnn-lstm-1", 0.5, 2.5, 0.97, 1.25, 100, ""});
    rep.rows.push_back(EvalRow{"no13", "cnn-lstm-1", 0.0, 0.0, 0.0, 0.0, 0, "insufficient data"});
    auto csv = rep.to_csv();
    CHECK(csv.find("station,model,rmse,mape,r2,runtime_seconds,n,error") != std::string::npos);
    CHECK(csv.find("no8,cnn-lstm-1,0.5,2.5,0.97,1.25,100,") != std::string::npos);
    CHECK(csv.find("no13") != std::string::npos);
    CHECK(csv.find("insufficient data") != std::string::npos);
    auto md = rep.to_markdown();
    CHECK(md.find("| Station |") != std::string::npos);
    CHECK(md.find("| no8 |") != std::string::npos);
}

TEST_CASE("report json round-trips and failed rows carry only the error") {
    EvalReport rep;
    rep.rows.push_back(EvalRow{"no8", "lstm", 1.5, 3.0, 0.9, 2.0, 50, ""});
    rep.rows.push_back(EvalRow{"no13", "lstm", 0.0, 0.0, 0.0, 0.0, 0, "constant truth"});
    auto j = rep.to_json();
    CHECK_FALSE(j.at("rows")[0].contains("error"));
    CHECK(j.at("rows")[1].at("error") == "constant truth");
    CHECK_FALSE(j.at("rows")[1].contains("rmse"));
    auto back = EvalReport::from_json(j);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].rmse == 1.5);
    CHECK(back.rows[0].n == 50);
    CHECK_FALSE(back.rows[0].failed());
    CHECK(back.rows[1].failed());
    CHECK(back.rows[1].error == "constant truth");
}
