#pragma once

// Minimal CSV and number formatting helpers. All numeric output in this
// project uses shortest round-trip decimal formatting (std::to_chars), so a
// written file re-parses to bit-identical doubles and identical runs produce
// byte-identical files.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace nvodmr {

// Parse/shape problem in a text input; line is 1-based.
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& message, long line)
        : std::runtime_error(message + " (line " + std::to_string(line) + ")"),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view text, double& out) {
    // Trim surrounding spaces and an optional trailing CR from DOS files.
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() &&
           (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (text.empty()) return false;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

// Read a two-column CSV. A single header line is skipped if its first cell
// is not numeric. Throws CsvError naming the first offending line.
inline std::vector<std::pair<double, double>> read_two_column_csv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "' for reading");
    std::vector<std::pair<double, double>> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        if (view.empty()) continue;
        const auto comma = view.find(',');
        if (comma == std::string_view::npos)
            throw CsvError("expected two comma-separated columns", line_no);
        if (view.find(',', comma + 1) != std::string_view::npos)
            throw CsvError("expected exactly two columns", line_no);
        double a = 0.0, b = 0.0;
        const bool ok_a = parse_double(view.substr(0, comma), a);
        const bool ok_b = parse_double(view.substr(comma + 1), b);
        if (!ok_a || !ok_b) {
            if (line_no == 1 && rows.empty()) continue;  // header line
            throw CsvError("non-numeric cell", line_no);
        }
        rows.emplace_back(a, b);
    }
    return rows;
}

// FNV-1a over a byte string; used for config provenance hashes.
inline std::uint64_t fnv1a_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace nvodmr
