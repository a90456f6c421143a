#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cactus {

/// Error type thrown by every module; messages carry position/module context.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// The three significance metrics.
enum class Metric { CPB, CDG, CPR };

inline constexpr Metric kAllMetrics[] = {Metric::CPB, Metric::CDG, Metric::CPR};
inline constexpr int kMetricCount = 3;

inline const char* metric_name(Metric m) {
    switch (m) {
    case Metric::CPB: return "CPB";
    case Metric::CDG: return "CDG";
    case Metric::CPR: return "CPR";
    }
    return "?";
}

inline std::optional<Metric> metric_from_name(std::string_view s) {
    if (s == "CPB") return Metric::CPB;
    if (s == "CDG") return Metric::CDG;
    if (s == "CPR") return Metric::CPR;
    return std::nullopt;
}

/// Shortest round-trip decimal form of a double. Used everywhere a float
/// reaches a file so that artifacts are byte-stable across reruns.
inline std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
    // std::from_chars does not skip leading whitespace and rejects "+1";
    // accept both since they show up in hand-edited CSVs.
    size_t begin = s.find_first_not_of(" \t");
    if (begin == std::string_view::npos) return std::nullopt;
    size_t end = s.find_last_not_of(" \t") + 1;
    s = s.substr(begin, end - begin);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double value = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
    return out;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace cactus
