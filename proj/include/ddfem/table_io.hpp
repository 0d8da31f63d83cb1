#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ddfem/analysis.hpp"
#include "ddfem/dd.hpp"

namespace ddfem {

/// Shortest decimal form that parses back to the same double; locale
/// independent, so reruns produce byte-identical files.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("malformed number: '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("malformed integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

inline std::vector<std::string> nonempty_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line != "\r") lines.push_back(line);
    return lines;
}

inline constexpr const char* kStudyHeader = "n,h,err_l2,rate_l2,err_h1,rate_h1,err_star,rate_star,iters,converged";

inline std::string rate_table_to_csv(const RateTable& table) {
    std::string out = std::string(kStudyHeader) + "\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.n) + "," + format_double(r.h);
        out += "," + format_double(r.error.l2) + "," + (std::isnan(r.rate_l2) ? "" : format_double(r.rate_l2));
        out += "," + format_double(r.error.h1_semi) + "," + (std::isnan(r.rate_h1) ? "" : format_double(r.rate_h1));
        out += "," + format_double(r.error.star) + "," + (std::isnan(r.rate_star) ? "" : format_double(r.rate_star));
        out += "," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "\n";
    }
    return out;
}

inline RateTable parse_rate_table_csv(const std::string& text) {
    const auto lines = nonempty_lines(text);
    if (lines.empty() || split_csv_line(lines[0]) != split_csv_line(kStudyHeader))
        throw std::runtime_error("rate table csv: missing or wrong header");
    RateTable table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_csv_line(lines[i]);
        if (f.size() != 10) throw std::runtime_error("rate table csv: wrong field count on line " + std::to_string(i + 1));
        StudyRow r;
        r.n = static_cast<int>(parse_long(f[0]));
        r.h = parse_double(f[1]);
        r.error.l2 = parse_double(f[2]);
        if (!f[3].empty()) r.rate_l2 = parse_double(f[3]);
        r.error.h1_semi = parse_double(f[4]);
        if (!f[5].empty()) r.rate_h1 = parse_double(f[5]);
        r.error.star = parse_double(f[6]);
        if (!f[7].empty()) r.rate_star = parse_double(f[7]);
        r.iterations = static_cast<int>(parse_long(f[8]));
        r.converged = parse_long(f[9]) != 0;
        table.rows.push_back(r);
    }
    return table;
}

inline std::string rate_table_to_markdown(const RateTable& table) {
    std::string out = "| n | h | err_l2 | rate | err_h1 | rate | err_star | rate | iters | conv |\n";
    out += "|--:|--:|-------:|-----:|-------:|-----:|---------:|-----:|------:|-----:|\n";
    char buf[64];
    auto sci = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.4e", v);
        return std::string(buf);
    };
    auto fix = [&buf](double v) {
        if (std::isnan(v)) return std::string("-");
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf);
    };
    for (const auto& r : table.rows) {
        out += "| " + std::to_string(r.n) + " | " + fix(r.h) + " | " + sci(r.error.l2) + " | " + fix(r.rate_l2) +
               " | " + sci(r.error.h1_semi) + " | " + fix(r.rate_h1) + " | " + sci(r.error.star) + " | " +
               fix(r.rate_star) + " | " + std::to_string(r.iterations) + " | " + (r.converged ? "yes" : "no") +
               " |\n";
    }
    return out;
}

inline constexpr const char* kRunHeader = "n,h,err_l2,err_h1,err_energy,err_star,dissipation,iters,converged";

struct RunRecord {
    int n = 0;
    double h = 0.0;
    ErrorReport error;
    int iterations = 0;
    bool converged = false;
};

inline std::string run_record_to_csv(const RunRecord& r) {
    std::string out = std::string(kRunHeader) + "\n";
    out += std::to_string(r.n) + "," + format_double(r.h) + "," + format_double(r.error.l2) + "," +
           format_double(r.error.h1_semi) + "," + format_double(r.error.energy) + "," + format_double(r.error.star) +
           "," + format_double(r.error.dissipation) + "," + std::to_string(r.iterations) + "," +
           (r.converged ? "1" : "0") + "\n";
    return out;
}

inline RunRecord parse_run_record_csv(const std::string& text) {
    const auto lines = nonempty_lines(text);
    if (lines.size() != 2 || split_csv_line(lines[0]) != split_csv_line(kRunHeader))
        throw std::runtime_error("run record csv: expected header plus one row");
    const auto f = split_csv_line(lines[1]);
    if (f.size() != 9) throw std::runtime_error("run record csv: wrong field count");
    RunRecord r;
    r.n = static_cast<int>(parse_long(f[0]));
    r.h = parse_double(f[1]);
    r.error.l2 = parse_double(f[2]);
    r.error.h1_semi = parse_double(f[3]);
    r.error.energy = parse_double(f[4]);
    r.error.star = parse_double(f[5]);
    r.error.dissipation = parse_double(f[6]);
    r.iterations = static_cast<int>(parse_long(f[7]));
    r.converged = parse_long(f[8]) != 0;
    return r;
}

inline constexpr const char* kTraceHeader = "k,max_increment,dissipation,frozen_elements";

inline std::string trace_to_csv(const SolveReport& report) {
    std::string out = std::string(kTraceHeader) + "\n";
    for (const auto& rec : report.history)
        out += std::to_string(rec.k) + "," + format_double(rec.max_increment) + "," + format_double(rec.dissipation) +
               "," + std::to_string(rec.frozen_elements) + "\n";
    return out;
}

inline std::vector<IterationRecord> parse_trace_csv(const std::string& text) {
    const auto lines = nonempty_lines(text);
    if (lines.empty() || split_csv_line(lines[0]) != split_csv_line(kTraceHeader))
        throw std::runtime_error("trace csv: missing or wrong header");
    std::vector<IterationRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_csv_line(lines[i]);
        if (f.size() != 4) throw std::runtime_error("trace csv: wrong field count on line " + std::to_string(i + 1));
        IterationRecord rec;
        rec.k = static_cast<int>(parse_long(f[0]));
        rec.max_increment = parse_double(f[1]);
        rec.dissipation = parse_double(f[2]);
        rec.frozen_elements = static_cast<int>(parse_long(f[3]));
        out.push_back(rec);
    }
    return out;
}

}  // namespace ddfem
