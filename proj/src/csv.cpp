#include "metaug/csv.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "metaug/error.hpp"

namespace metaug {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool parse_number(const std::string& tok, double& out) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

}  // namespace

RawDataset parse_csv(const std::string& text, const CsvSchemaSpec& spec, const std::string& name) {
    if (spec.label_column.empty()) throw ConfigError("csv: schema must name the label column");
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("csv: empty file " + name);
    const std::vector<std::string> header = split_line(line);

    auto col_of = [&](const std::string& n) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == n) return i;
        throw ParseError("csv: column '" + n + "' not in header of " + name);
    };

    const std::size_t label_col = col_of(spec.label_column);
    std::vector<char> is_categorical(header.size(), 0);
    for (const std::string& c : spec.categorical_columns) is_categorical[col_of(c)] = 1;
    std::vector<char> ignored(header.size(), 0);
    for (const std::string& c : spec.ignore_columns) ignored[col_of(c)] = 1;

    RawDataset ds;
    ds.name = name;
    ds.categories_from_schema = false;
    std::vector<std::size_t> input_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i == label_col || ignored[i]) continue;
        ColumnSpec col;
        col.name = header[i];
        col.kind = is_categorical[i] ? ColumnKind::Categorical : ColumnKind::Continuous;
        ds.columns.push_back(std::move(col));
        input_cols.push_back(i);
    }

    std::vector<std::string> label_tokens;
    std::map<std::string, std::size_t> label_count;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::vector<std::string> fields = split_line(t);
        if (fields.size() != header.size())
            throw ParseError("csv: line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        if (spec.drop_missing) {
            bool missing = false;
            for (const std::string& f : fields) missing = missing || f == spec.missing_token;
            if (missing) {
                ++ds.dropped_rows;
                continue;
            }
        }
        std::vector<double> row;
        row.reserve(input_cols.size());
        for (std::size_t k = 0; k < input_cols.size(); ++k) {
            const std::string& tok = fields[input_cols[k]];
            ColumnSpec& col = ds.columns[k];
            if (col.kind == ColumnKind::Categorical) {
                auto idx = col.category_index(tok);
                if (!idx) {
                    col.categories.push_back(tok);
                    idx = col.categories.size() - 1;
                }
                row.push_back(static_cast<double>(*idx));
            } else {
                double v;
                if (!parse_number(tok, v))
                    throw ParseError("csv: line " + std::to_string(line_no) +
                                     ": cannot parse numeric value '" + tok + "' in column " +
                                     col.name);
                row.push_back(v);
            }
        }
        ds.rows.push_back(std::move(row));
        label_tokens.push_back(fields[label_col]);
        ++label_count[fields[label_col]];
    }

    if (ds.rows.empty()) throw ParseError("csv: no data rows in " + name);
    if (label_count.size() < 2)
        throw ParseError("csv: only one class present in " + name +
                         "; cannot define a minority class");
    if (label_count.size() > 2)
        throw ParseError("csv: more than two class tokens in " + name);

    std::string positive = spec.positive_token;
    if (positive.empty()) {
        // Fall back to count: the rarer token is the minority.
        auto it = label_count.begin();
        auto first = *it++;
        auto second = *it;
        positive = first.second <= second.second ? first.first : second.first;
    } else if (!label_count.count(positive)) {
        throw ParseError("csv: positive token '" + positive + "' never occurs in " + name);
    }
    ds.positive_token = positive;
    for (const auto& [tok, cnt] : label_count)
        if (tok != positive) ds.negative_token = tok;
    ds.labels.reserve(label_tokens.size());
    for (const std::string& t : label_tokens) ds.labels.push_back(t == positive ? 1 : 0);
    return ds;
}

RawDataset load_csv(const std::string& path, const CsvSchemaSpec& spec) {
    std::ifstream in(path);
    if (!in) throw ParseError("csv: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string base = path;
    const std::size_t slash = base.find_last_of('/');
    if (slash != std::string::npos) base = base.substr(slash + 1);
    const std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos) base = base.substr(0, dot);
    return parse_csv(ss.str(), spec, base);
}

}  // namespace metaug
