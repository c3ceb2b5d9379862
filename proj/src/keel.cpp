#include "metaug/keel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "metaug/error.hpp"

namespace metaug {

std::size_t RawDataset::minority_count() const {
    std::size_t n = 0;
    for (int y : labels) n += y == 1;
    return n;
}
std::size_t RawDataset::majority_count() const { return labels.size() - minority_count(); }
double RawDataset::imbalance_ratio() const {
    const std::size_t m = minority_count();
    return m == 0 ? 0.0 : static_cast<double>(majority_count()) / static_cast<double>(m);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
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

struct Attribute {
    std::string name;
    bool categorical = false;
    std::vector<std::string> values;
};

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw ParseError("keel: line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

RawDataset parse_keel_dat(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    std::string relation = name;
    std::vector<Attribute> attrs;
    std::vector<std::string> declared_outputs;
    bool in_data = false;

    std::vector<std::vector<std::string>> raw_rows;
    std::vector<std::size_t> raw_line_no;

    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;
        if (!in_data && t[0] == '@') {
            const std::string lt = lower(t);
            if (lt.rfind("@relation", 0) == 0) {
                relation = trim(t.substr(9));
                if (relation.empty()) relation = name;
            } else if (lt.rfind("@attribute", 0) == 0) {
                std::string rest = trim(t.substr(10));
                if (rest.empty()) fail(line_no, "empty @attribute");
                Attribute a;
                const std::size_t brace = rest.find('{');
                if (brace != std::string::npos) {
                    const std::size_t close = rest.find('}', brace);
                    if (close == std::string::npos) fail(line_no, "unterminated value set");
                    a.name = trim(rest.substr(0, brace));
                    a.categorical = true;
                    a.values = split_commas(rest.substr(brace + 1, close - brace - 1));
                    if (a.values.empty()) fail(line_no, "empty categorical value set");
                } else {
                    // "<name> real [lo, hi]" / "<name> integer" / bare name
                    std::istringstream as(rest);
                    as >> a.name;
                    std::string kind;
                    as >> kind;
                    const std::string lk = lower(kind);
                    if (!kind.empty() && lk != "real" && lk != "integer" && lk != "numeric")
                        fail(line_no, "unknown attribute type '" + kind + "'");
                }
                if (a.name.empty()) fail(line_no, "attribute without a name");
                attrs.push_back(std::move(a));
            } else if (lt.rfind("@inputs", 0) == 0) {
                // informative; the last attribute (or @outputs) names the label
            } else if (lt.rfind("@outputs", 0) == 0 || lt.rfind("@output", 0) == 0) {
                const std::size_t sp = t.find_first_of(" \t");
                if (sp != std::string::npos) declared_outputs = split_commas(trim(t.substr(sp)));
            } else if (lt.rfind("@data", 0) == 0) {
                in_data = true;
            } else {
                fail(line_no, "unknown header directive: " + t);
            }
            continue;
        }
        if (!in_data) fail(line_no, "data row before @data");
        raw_rows.push_back(split_commas(t));
        raw_line_no.push_back(line_no);
    }

    if (attrs.empty()) throw ParseError("keel: no @attribute declarations in " + name);
    if (!in_data) throw ParseError("keel: missing @data section in " + name);

    // Label column: the declared output, else the last attribute.
    std::size_t label_col = attrs.size() - 1;
    if (!declared_outputs.empty()) {
        if (declared_outputs.size() != 1)
            throw ParseError("keel: exactly one output attribute expected in " + name);
        bool found = false;
        for (std::size_t i = 0; i < attrs.size(); ++i)
            if (attrs[i].name == declared_outputs[0]) {
                label_col = i;
                found = true;
            }
        if (!found) throw ParseError("keel: @outputs names unknown attribute in " + name);
    }

    RawDataset ds;
    ds.name = relation;
    ds.categories_from_schema = true;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (i == label_col) continue;
        ColumnSpec col;
        col.name = attrs[i].name;
        col.kind = attrs[i].categorical ? ColumnKind::Categorical : ColumnKind::Continuous;
        col.categories = attrs[i].values;
        ds.columns.push_back(std::move(col));
    }

    std::vector<std::string> label_tokens;
    std::unordered_map<std::string, std::size_t> label_count;
    for (std::size_t r = 0; r < raw_rows.size(); ++r) {
        const auto& fields = raw_rows[r];
        if (fields.size() != attrs.size())
            fail(raw_line_no[r], "expected " + std::to_string(attrs.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(ds.columns.size());
        std::size_t out_col = 0;
        for (std::size_t c = 0; c < attrs.size(); ++c) {
            if (c == label_col) continue;
            const std::string& tok = fields[c];
            const ColumnSpec& spec = ds.columns[out_col++];
            if (spec.kind == ColumnKind::Categorical) {
                auto idx = spec.category_index(tok);
                if (!idx)
                    fail(raw_line_no[r], "unknown categorical token '" + tok + "' in column " +
                                             spec.name);
                row.push_back(static_cast<double>(*idx));
            } else {
                double v;
                if (!parse_number(tok, v))
                    fail(raw_line_no[r], "cannot parse numeric value '" + tok + "' in column " +
                                             spec.name);
                row.push_back(v);
            }
        }
        ds.rows.push_back(std::move(row));
        label_tokens.push_back(fields[label_col]);
        ++label_count[fields[label_col]];
    }

    if (label_count.size() != 2)
        throw ParseError("keel: expected exactly 2 class tokens in " + name + ", found " +
                         std::to_string(label_count.size()));

    // The rarer token is the minority (label 1); ties prefer a literal
    // "positive" token, else the first token encountered.
    auto it = label_count.begin();
    std::pair<std::string, std::size_t> first = *it++;
    std::pair<std::string, std::size_t> second = *it;
    std::string minority_tok;
    if (first.second != second.second) {
        minority_tok = first.second < second.second ? first.first : second.first;
    } else if (first.first == "positive" || second.first == "positive") {
        minority_tok = "positive";
    } else {
        minority_tok = label_tokens.front();
    }
    ds.positive_token = minority_tok;
    ds.negative_token = first.first == minority_tok ? second.first : first.first;
    ds.labels.reserve(label_tokens.size());
    for (const std::string& t : label_tokens) ds.labels.push_back(t == minority_tok ? 1 : 0);
    return ds;
}

RawDataset load_keel_dat(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("keel: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string base = path;
    const std::size_t slash = base.find_last_of('/');
    if (slash != std::string::npos) base = base.substr(slash + 1);
    const std::size_t dot = base.find_last_of('.');
    if (dot != std::string::npos) base = base.substr(0, dot);
    return parse_keel_dat(ss.str(), base);
}

}  // namespace metaug
