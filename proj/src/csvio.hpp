#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace afll::csv {

// Shortest round-trip double formatting; integers print without exponent.
std::string format_double(double v);

// Minimal writer with a fixed header. Fields containing separators or quotes
// are quoted RFC-style (the schemas here never need it, but parsers may rely
// on it).
class Writer {
public:
    Writer(const std::string& path, const std::vector<std::string>& header);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void begin_row();
    void field(double v);
    void field(std::int64_t v);
    void field(std::uint64_t v);
    void field(const std::string& v);
    void field(std::optional<double> v); // empty cell when absent
    void end_row();
    void flush();

private:
    void raw(const std::string& text);
    struct Impl;
    Impl* impl_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const; // -1 when missing
    std::vector<double> column_as_double(const std::string& name) const;
};

Table read_table(const std::string& path);

} // namespace afll::csv
