#include "csclasso/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace csclasso {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e && b != e;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

GroupedDataset load_csv_dataset(const std::string& csv_path, const std::string& target_column,
                                const std::string& group_spec_path, CsvLoadReport* report) {
    std::ifstream in(csv_path);
    if (!in) throw ParseError("cannot open " + csv_path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(csv_path + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);
    const std::size_t ncols = header.size();

    Eigen::Index target_idx = -1;
    for (std::size_t j = 0; j < ncols; ++j)
        if (header[j] == target_column) target_idx = static_cast<Eigen::Index>(j);
    if (target_idx < 0) throw UnknownTargetError("unknown target column '" + target_column + "'");

    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() && in.eof()) break;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != ncols) {
            std::ostringstream ss;
            ss << csv_path << ":" << lineno << ": expected " << ncols << " cells, got "
               << cells.size();
            throw ParseError(ss.str());
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw ParseError(csv_path + ": no data rows");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());

    // columns with any missing cell are dropped (never rows)
    std::vector<bool> has_missing(ncols, false);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < ncols; ++j) {
            if (rows[i][j].empty()) {
                if (static_cast<Eigen::Index>(j) == target_idx) {
                    std::ostringstream ss;
                    ss << csv_path << ":" << (i + 2) << ": column '" << header[j]
                       << "': target value missing";
                    throw ParseError(ss.str());
                }
                has_missing[j] = true;
            }
        }
    }

    std::vector<Eigen::Index> kept;
    CsvLoadReport rep;
    for (std::size_t j = 0; j < ncols; ++j) {
        if (static_cast<Eigen::Index>(j) == target_idx) continue;
        if (has_missing[j]) {
            rep.dropped_columns.push_back(header[j]);
        } else {
            kept.push_back(static_cast<Eigen::Index>(j));
            rep.predictor_columns.push_back(header[j]);
        }
    }
    if (kept.empty()) throw ParseError(csv_path + ": no usable predictor columns");
    rep.target = target_column;
    rep.rows = n;

    GroupedDataset data;
    data.X.resize(n, static_cast<Eigen::Index>(kept.size()) + 1);
    data.X.col(0).setOnes();
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& cells = rows[static_cast<std::size_t>(i)];
        double v = 0.0;
        if (!parse_double(cells[static_cast<std::size_t>(target_idx)], v)) {
            std::ostringstream ss;
            ss << csv_path << ":" << (i + 2) << ": column '" << header[static_cast<std::size_t>(target_idx)]
               << "': cannot parse '" << cells[static_cast<std::size_t>(target_idx)] << "'";
            throw ParseError(ss.str());
        }
        data.y[i] = v;
        for (std::size_t jj = 0; jj < kept.size(); ++jj) {
            const std::size_t j = static_cast<std::size_t>(kept[jj]);
            if (!parse_double(cells[j], v)) {
                std::ostringstream ss;
                ss << csv_path << ":" << (i + 2) << ": column '" << header[j] << "': cannot parse '"
                   << cells[j] << "'";
                throw ParseError(ss.str());
            }
            data.X(i, static_cast<Eigen::Index>(jj) + 1) = v;
        }
    }

    if (!group_spec_path.empty()) {
        json doc;
        try {
            doc = json::parse(read_text_file(group_spec_path));
        } catch (const json::exception& e) {
            throw ParseError(group_spec_path + ": " + e.what());
        }
        if (!doc.contains("groups") || !doc["groups"].is_array())
            throw ParseError(group_spec_path + ": missing 'groups' array");
        for (const auto& g : doc["groups"]) {
            IndexSet rows_l;
            for (const auto& r : g.at("rows")) {
                const Eigen::Index idx = r.get<Eigen::Index>();
                if (idx < 0 || idx >= n) {
                    std::ostringstream ss;
                    ss << group_spec_path << ": row index " << idx << " outside [0, " << n << ")";
                    throw ParseError(ss.str());
                }
                rows_l.push_back(idx);
            }
            const std::string name = g.value("name", "group" + std::to_string(data.groups.size() + 1));
            if (rows_l.empty()) throw EmptyGroupError(group_spec_path + ": group '" + name + "' is empty");
            data.groups.push_back(std::move(rows_l));
            data.group_names.push_back(name);
        }
    }

    if (report) *report = std::move(rep);
    return data;
}

std::string stats_to_json(const StandardizationStats& stats) {
    json cols = json::array();
    for (Eigen::Index j = 0; j < stats.col_mean.size(); ++j) {
        json c;
        c["name"] = j < static_cast<Eigen::Index>(stats.col_names.size())
                        ? stats.col_names[static_cast<std::size_t>(j)]
                        : "x" + std::to_string(j + 1);
        c["mean"] = stats.col_mean[j];
        c["stdev"] = stats.col_stdev[j];
        cols.push_back(c);
    }
    json doc;
    doc["columns"] = cols;
    doc["response"] = {{"mean", stats.y_mean}, {"stdev", stats.y_stdev}};
    return doc.dump(2) + "\n";
}

StandardizationStats stats_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("standardization stats: ") + e.what());
    }
    StandardizationStats st;
    const auto& cols = doc.at("columns");
    st.col_mean.resize(static_cast<Eigen::Index>(cols.size()));
    st.col_stdev.resize(static_cast<Eigen::Index>(cols.size()));
    Eigen::Index j = 0;
    for (const auto& c : cols) {
        st.col_names.push_back(c.value("name", ""));
        st.col_mean[j] = c.at("mean").get<double>();
        st.col_stdev[j] = c.at("stdev").get<double>();
        ++j;
    }
    st.y_mean = doc.at("response").at("mean").get<double>();
    st.y_stdev = doc.at("response").at("stdev").get<double>();
    return st;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    std::ostringstream ss;
    ss << std::hex << h;
    return ss.str();
}

}  // namespace csclasso
