#include "csts/timefmt.hpp"

#include <charconv>
#include <chrono>

#include <fmt/format.h>

#include "csts/error.hpp"

namespace csts {

std::string_view to_string(TimestampFormat f) {
  return f == TimestampFormat::EpochSeconds ? "epoch_seconds" : "iso8601";
}

TimestampFormat parse_timestamp_format(std::string_view name) {
  if (name == "epoch_seconds") return TimestampFormat::EpochSeconds;
  if (name == "iso8601") return TimestampFormat::Iso8601;
  throw Error(ErrorCode::ParseError, "unknown timestamp format '" + std::string(name) + "'");
}

std::optional<Timestamp> parse_epoch_seconds(std::string_view s) {
  Timestamp v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

namespace {

std::optional<int> digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view s) {
  // 2024-01-01T00:00:00Z
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':' || s[19] != 'Z') {
    return std::nullopt;
  }
  auto y = digits(s, 0, 4), mo = digits(s, 5, 2), d = digits(s, 8, 2);
  auto h = digits(s, 11, 2), mi = digits(s, 14, 2), se = digits(s, 17, 2);
  if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
  if (*h > 23 || *mi > 59 || *se > 59) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  auto days = sys_days(ymd).time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + *h * 3600 + *mi * 60 + *se;
}

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  Timestamp day_count = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
  Timestamp rem = t - day_count * 86400;
  year_month_day ymd{sys_days{days{day_count}}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", int(ymd.year()),
                     unsigned(ymd.month()), unsigned(ymd.day()), rem / 3600, (rem / 60) % 60,
                     rem % 60);
}

std::optional<Timestamp> parse_timestamp(std::string_view s,
                                         const std::vector<TimestampFormat>& formats) {
  for (auto f : formats) {
    auto t = f == TimestampFormat::EpochSeconds ? parse_epoch_seconds(s) : parse_iso8601(s);
    if (t) return t;
  }
  return std::nullopt;
}

}  // namespace csts
