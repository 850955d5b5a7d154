#include "csclasso/types.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>

using namespace csclasso;

namespace {

ProblemSpec make_spec(const GroupedDataset& d, double lambda, Vector thresholds) {
    ProblemSpec s;
    s.data = &d;
    s.penalty = PenaltyMatrix::identity_no_intercept_for(d.p());
    s.lambda = lambda;
    s.thresholds = std::move(thresholds);
    return s;
}

}  // namespace

TEST_CASE("validate_problem accepts a well-formed spec") {
    GroupedDataset d = testutil::random_dataset(20, 3, 7, 2);
    ProblemSpec s = make_spec(d, 0.1, Vector::Constant(2, 1.0));
    CHECK(validate_problem(s).ok());
}

TEST_CASE("validate_problem flags threshold/group count mismatch") {
    GroupedDataset d = testutil::random_dataset(20, 3, 7, 3);
    ProblemSpec s = make_spec(d, 0.1, Vector::Constant(2, 1.0));
    auto out = validate_problem(s);
    REQUIRE_FALSE(out.ok());
    bool found = std::any_of(out.violations.begin(), out.violations.end(), [](const std::string& v) {
        return v.find("threshold/group count mismatch") != std::string::npos;
    });
    CHECK(found);
}

TEST_CASE("validate_problem flags a missing intercept column") {
    GroupedDataset d = testutil::random_dataset(10, 2, 7, 1);
    d.X(3, 0) = 0.5;
    ProblemSpec s = make_spec(d, 0.1, Vector::Constant(1, 1.0));
    auto out = validate_problem(s);
    REQUIRE_FALSE(out.ok());
    bool found = std::any_of(out.violations.begin(), out.violations.end(), [](const std::string& v) {
        return v.find("missing intercept column") != std::string::npos;
    });
    CHECK(found);
}

TEST_CASE("validate_problem flags empty groups, bad rows and nonpositive thresholds") {
    GroupedDataset d = testutil::random_dataset(10, 2, 7, 1);
    d.groups.push_back({});
    ProblemSpec s = make_spec(d, 0.1, Vector::Constant(2, 1.0));
    CHECK_FALSE(validate_problem(s).ok());

    GroupedDataset d2 = testutil::random_dataset(10, 2, 7, 1);
    d2.groups[0].push_back(99);
    ProblemSpec s2 = make_spec(d2, 0.1, Vector::Constant(1, 1.0));
    CHECK_FALSE(validate_problem(s2).ok());

    GroupedDataset d3 = testutil::random_dataset(10, 2, 7, 1);
    ProblemSpec s3 = make_spec(d3, 0.1, Vector::Constant(1, 0.0));
    CHECK_FALSE(validate_problem(s3).ok());

    ProblemSpec s4 = make_spec(d3, -1.0, Vector::Constant(1, 1.0));
    CHECK_FALSE(validate_problem(s4).ok());
}

TEST_CASE("validate_problem is pure") {
    GroupedDataset d = testutil::random_dataset(12, 2, 3, 2);
    ProblemSpec s = make_spec(d, 0.2, Vector::Constant(1, 1.0));  // deliberate mismatch
    auto a = validate_problem(s);
    auto b = validate_problem(s);
    CHECK(a.violations == b.violations);
}

TEST_CASE("gather_rows with empty set returns the full dataset") {
    GroupedDataset d = testutil::random_dataset(8, 2, 11);
    SubsetView v = gather_rows(d, {});
    CHECK(v.X.rows() == 8);
    CHECK(v.y.size() == 8);
    SubsetView w = gather_rows(d, {1, 3});
    CHECK(w.X.rows() == 2);
    CHECK(w.y[0] == d.y[1]);
    CHECK(w.X(1, 1) == d.X(3, 1));
}
