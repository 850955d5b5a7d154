#include "csclasso/types.hpp"

#include <sstream>

namespace csclasso {

namespace {

bool has_intercept_column(const Matrix& X) {
    if (X.cols() == 0 || X.rows() == 0) return false;
    return (X.col(0).array() == 1.0).all();
}

}  // namespace

ValidationOutcome validate_problem(const ProblemSpec& spec) {
    ValidationOutcome out;
    auto add = [&out](const std::string& msg) { out.violations.push_back(msg); };

    if (spec.data == nullptr) {
        add("dataset missing");
        return out;
    }
    const GroupedDataset& d = *spec.data;
    const Eigen::Index n = d.X.rows();

    if (n == 0) add("empty dataset (n = 0)");
    if (d.X.cols() < 2) add("design matrix needs an intercept column plus p >= 1 predictors");
    if (d.y.size() != n) {
        std::ostringstream ss;
        ss << "response length " << d.y.size() << " != row count " << n;
        add(ss.str());
    }
    if (n > 0 && !has_intercept_column(d.X)) add("missing intercept column (column 0 must be all ones)");

    for (std::size_t l = 0; l < d.groups.size(); ++l) {
        if (d.groups[l].empty()) {
            std::ostringstream ss;
            ss << "group " << l << " is empty";
            add(ss.str());
            continue;
        }
        for (Eigen::Index r : d.groups[l]) {
            if (r < 0 || r >= n) {
                std::ostringstream ss;
                ss << "group " << l << " references row " << r << " outside [0, " << n << ")";
                add(ss.str());
                break;
            }
        }
    }
    for (Eigen::Index r : d.objective_rows) {
        if (r < 0 || r >= n) {
            std::ostringstream ss;
            ss << "objective row " << r << " outside [0, " << n << ")";
            add(ss.str());
            break;
        }
    }

    if (spec.lambda < 0.0) add("lambda must be nonnegative");

    if (spec.thresholds.size() != static_cast<Eigen::Index>(d.groups.size())) {
        std::ostringstream ss;
        ss << "threshold/group count mismatch: " << spec.thresholds.size() << " thresholds for "
           << d.groups.size() << " groups";
        add(ss.str());
    }
    for (Eigen::Index l = 0; l < spec.thresholds.size(); ++l) {
        if (!(spec.thresholds[l] > 0.0)) {
            std::ostringstream ss;
            ss << "threshold " << l << " must be strictly positive (got " << spec.thresholds[l] << ")";
            add(ss.str());
            break;
        }
    }

    if (spec.penalty.kind == PenaltyKind::general) {
        if (spec.penalty.A.rows() < 1) add("penalty matrix must have m >= 1 rows");
        if (spec.penalty.A.cols() != d.X.cols()) {
            std::ostringstream ss;
            ss << "penalty matrix has " << spec.penalty.A.cols() << " columns, expected " << d.X.cols();
            add(ss.str());
        }
    }

    return out;
}

SubsetView gather_rows(const GroupedDataset& data, const IndexSet& rows) {
    SubsetView v;
    if (rows.empty()) {
        v.X = data.X;
        v.y = data.y;
        return v;
    }
    v.X.resize(static_cast<Eigen::Index>(rows.size()), data.X.cols());
    v.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        v.X.row(static_cast<Eigen::Index>(i)) = data.X.row(rows[i]);
        v.y[static_cast<Eigen::Index>(i)] = data.y[rows[i]];
    }
    return v;
}

}  // namespace csclasso
