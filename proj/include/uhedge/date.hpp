#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace uhedge {

/// Calendar day. Thin wrapper over `sys_days` so dates order, compare and
/// hash like integers.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
    constexpr Date(int y, unsigned m, unsigned d)
        : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                            std::chrono::day{d}}) {}

    [[nodiscard]] constexpr std::chrono::sys_days days() const { return days_; }
    [[nodiscard]] constexpr int serial() const { return days_.time_since_epoch().count(); }

    [[nodiscard]] constexpr Date plus_days(int n) const {
        return Date{days_ + std::chrono::days{n}};
    }

    /// Monday = 1 ... Sunday = 7.
    [[nodiscard]] unsigned iso_weekday() const {
        return std::chrono::weekday{days_}.iso_encoding();
    }

    [[nodiscard]] std::string iso() const {
        const std::chrono::year_month_day ymd{days_};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

/// Parse `text` with a strftime-style `format` (e.g. "%Y-%m-%d", "%d/%m/%Y").
/// Returns nullopt when the text does not match or names an invalid day.
inline std::optional<Date> parse_date(std::string_view text, const std::string& format = "%Y-%m-%d") {
    std::tm tm{};
    std::istringstream in{std::string(text)};
    in.imbue(std::locale::classic());
    in >> std::get_time(&tm, format.c_str());
    if (in.fail()) return std::nullopt;
    in >> std::ws;
    if (!in.eof()) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{tm.tm_year + 1900},
                                          std::chrono::month{static_cast<unsigned>(tm.tm_mon + 1)},
                                          std::chrono::day{static_cast<unsigned>(tm.tm_mday)}};
    if (!ymd.ok()) return std::nullopt;
    return Date{std::chrono::sys_days{ymd}};
}

}  // namespace uhedge
