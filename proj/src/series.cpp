#include "qkdrisk/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qkdrisk/errors.hpp"

namespace qkdrisk {

std::vector<double> QberSeries::qber_values() const {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.qber);
    return v;
}

bool QberSeries::has_labels() const {
    return std::any_of(samples.begin(), samples.end(),
                       [](const QberSample& s) { return s.attack_label.has_value(); });
}

std::size_t QberSeries::labeled_count() const {
    std::size_t n = 0;
    for (const auto& s : samples)
        if (s.attack_label && *s.attack_label) ++n;
    return n;
}

void QberSeries::validate() const {
    std::int64_t prev = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!(s.qber >= 0.0 && s.qber <= 1.0))
            throw DataError("sample " + std::to_string(i) + ": qber " + std::to_string(s.qber) +
                            " outside [0,1]");
        if (s.visibility && !(*s.visibility >= 0.0 && *s.visibility <= 1.0))
            throw DataError("sample " + std::to_string(i) + ": visibility outside [0,1]");
        if (s.key_rate && *s.key_rate < 0.0)
            throw DataError("sample " + std::to_string(i) + ": negative key rate");
        if (s.timestamp < prev)
            throw DataError("sample " + std::to_string(i) + ": timestamps not non-decreasing");
        prev = s.timestamp;
    }
}

FoldSet partition_folds(std::size_t n, std::size_t k, FoldMode mode) {
    if (k < 2) throw ConfigError("fold count must be at least 2");
    if (k > n) throw ConfigError("fold count " + std::to_string(k) + " exceeds sample count " +
                                 std::to_string(n));
    FoldSet out;
    out.folds.resize(k);
    if (mode == FoldMode::Contiguous) {
        // remainder goes to the leading folds, one extra index each
        std::size_t base = n / k, rem = n % k, pos = 0;
        for (std::size_t f = 0; f < k; ++f) {
            std::size_t len = base + (f < rem ? 1 : 0);
            out.folds[f].reserve(len);
            for (std::size_t j = 0; j < len; ++j) out.folds[f].push_back(pos++);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) out.folds[i % k].push_back(i);
    }
    return out;
}

FoldSet partition_folds(const QberSeries& series, std::size_t k, FoldMode mode) {
    return partition_folds(series.size(), k, mode);
}

std::vector<double> fold_values(const QberSeries& series, const FoldSet& folds, std::size_t i) {
    if (i >= folds.k()) throw ConfigError("fold index out of range");
    std::vector<double> v;
    v.reserve(folds.folds[i].size());
    for (std::size_t idx : folds.folds[i]) v.push_back(series.samples[idx].qber);
    return v;
}

namespace {

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

bool parse_double(const std::string& text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

bool parse_i64(const std::string& text, std::int64_t& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

QberSeries load_qber_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string header;
    if (!std::getline(in, header)) throw DataError(path + ": empty file");
    auto names = split_csv_line(header);

    auto col_of = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    };
    int c_ts = col_of(schema.timestamp);
    int c_qber = col_of(schema.qber);
    int c_vis = col_of(schema.visibility);
    int c_key = col_of(schema.key_rate);
    int c_lbl = col_of(schema.attack_label);
    if (c_qber < 0) throw DataError(path + ": missing required column '" + schema.qber + "'");

    QberSeries series;
    std::vector<std::string> bad_rows;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        auto cell = [&](int c) -> std::string {
            return (c >= 0 && c < static_cast<int>(cells.size())) ? cells[c] : std::string();
        };

        QberSample s;
        std::string q = cell(c_qber);
        double qv = 0.0;
        if (!parse_double(q, qv)) {
            bad_rows.push_back("line " + std::to_string(lineno) + ": unparseable qber '" + q + "'");
            continue;
        }
        if (qv < 0.0 || qv > 1.0) {
            bad_rows.push_back("line " + std::to_string(lineno) + ": qber " + q + " outside [0,1]");
            continue;
        }
        s.qber = qv;

        if (c_ts >= 0 && !cell(c_ts).empty()) {
            if (!parse_i64(cell(c_ts), s.timestamp)) {
                bad_rows.push_back("line " + std::to_string(lineno) + ": unparseable timestamp '" +
                                   cell(c_ts) + "'");
                continue;
            }
        }
        if (c_vis >= 0 && !cell(c_vis).empty()) {
            double v = 0.0;
            if (!parse_double(cell(c_vis), v) || v < 0.0 || v > 1.0) {
                bad_rows.push_back("line " + std::to_string(lineno) + ": bad visibility '" +
                                   cell(c_vis) + "'");
                continue;
            }
            s.visibility = v;
        }
        if (c_key >= 0 && !cell(c_key).empty()) {
            double v = 0.0;
            if (!parse_double(cell(c_key), v) || v < 0.0) {
                bad_rows.push_back("line " + std::to_string(lineno) + ": bad key_rate '" +
                                   cell(c_key) + "'");
                continue;
            }
            s.key_rate = v;
        }
        if (c_lbl >= 0 && !cell(c_lbl).empty()) {
            const std::string& t = cell(c_lbl);
            if (t == "0")
                s.attack_label = false;
            else if (t == "1")
                s.attack_label = true;
            else {
                bad_rows.push_back("line " + std::to_string(lineno) + ": bad attack_label '" + t +
                                   "'");
                continue;
            }
        }
        series.samples.push_back(s);
    }

    if (!bad_rows.empty()) {
        std::ostringstream msg;
        msg << path << ": " << bad_rows.size() << " rejected row(s):";
        for (const auto& r : bad_rows) msg << "\n  " << r;
        throw DataError(msg.str());
    }
    if (series.samples.empty()) throw DataError(path + ": no data rows");

    std::stable_sort(series.samples.begin(), series.samples.end(),
                     [](const QberSample& a, const QberSample& b) { return a.timestamp < b.timestamp; });
    series.validate();
    return series;
}

std::string to_csv_string(const QberSeries& series) {
    std::ostringstream out;
    bool labels = series.has_labels();
    out << "timestamp,qber,visibility,key_rate";
    if (labels) out << ",attack_label";
    out << "\n";
    for (const auto& s : series.samples) {
        out << s.timestamp << ',' << format_double(s.qber) << ',';
        if (s.visibility) out << format_double(*s.visibility);
        out << ',';
        if (s.key_rate) out << format_double(*s.key_rate);
        if (labels) out << ',' << (s.attack_label && *s.attack_label ? '1' : '0');
        out << "\n";
    }
    return out.str();
}

void save_qber_csv(const QberSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << to_csv_string(series);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace qkdrisk
