#include "csvio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace afll::csv {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

struct Writer::Impl {
    std::ofstream out;
    bool row_open = false;
    bool first_field = true;
};

Writer::Writer(const std::string& path, const std::vector<std::string>& header)
    : impl_(new Impl) {
    impl_->out.open(path, std::ios::binary);
    if (!impl_->out) {
        delete impl_;
        throw std::runtime_error("cannot open for writing: " + path);
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) impl_->out << ',';
        impl_->out << (needs_quoting(header[i]) ? quote(header[i]) : header[i]);
    }
    impl_->out << '\n';
}

Writer::~Writer() { delete impl_; }

void Writer::begin_row() {
    impl_->row_open = true;
    impl_->first_field = true;
}

void Writer::raw(const std::string& text) {
    if (!impl_->row_open) throw std::logic_error("csv field outside row");
    if (!impl_->first_field) impl_->out << ',';
    impl_->first_field = false;
    impl_->out << text;
}

void Writer::field(double v) { raw(format_double(v)); }
void Writer::field(std::int64_t v) { raw(std::to_string(v)); }
void Writer::field(std::uint64_t v) { raw(std::to_string(v)); }
void Writer::field(const std::string& v) { raw(needs_quoting(v) ? quote(v) : v); }
void Writer::field(std::optional<double> v) { raw(v ? format_double(*v) : std::string()); }

void Writer::end_row() {
    impl_->out << '\n';
    impl_->row_open = false;
}

void Writer::flush() { impl_->out.flush(); }

namespace {

std::vector<std::string> parse_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

int Table::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> Table::column_as_double(const std::string& name) const {
    const int idx = column_index(name);
    if (idx < 0) throw std::invalid_argument("csv column not found: " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (static_cast<std::size_t>(idx) >= row.size())
            throw std::runtime_error("csv row too short for column " + name);
        const std::string& cell = row[idx];
        double v = 0.0;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
            throw std::runtime_error("csv cell is not a number: '" + cell + "'");
        out.push_back(v);
    }
    return out;
}

Table read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open csv: " + path);
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() && in.eof()) break;
        auto fields = parse_line(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw std::runtime_error("csv has no header: " + path);
    return t;
}

} // namespace afll::csv
