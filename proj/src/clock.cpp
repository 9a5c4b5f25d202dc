#include "talechat/clock.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace talechat {
namespace {

struct Fields {
  int year;
  unsigned month, day;
  int hour, minute, second;
};

Fields split(Instant t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  return Fields{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                int(hms.minutes().count()), int(hms.seconds().count())};
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return true;
}

std::optional<Instant> build(int y, int mo, int d, int h, int mi, int s) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return Instant{sys_days{ymd}.time_since_epoch()} + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace

std::string format_log_timestamp(Instant t) {
  const auto f = split(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02u/%02u/%04d %02d:%02d:%02d", f.day, f.month, f.year, f.hour, f.minute, f.second);
  return buf;
}

std::optional<Instant> parse_log_timestamp(std::string_view s) {
  int d, mo, y, h, mi, sec;
  if (s.size() != 19 || s[2] != '/' || s[5] != '/' || s[10] != ' ' || s[13] != ':' || s[16] != ':') return std::nullopt;
  if (!read_int(s, 0, 2, d) || !read_int(s, 3, 2, mo) || !read_int(s, 6, 4, y) || !read_int(s, 11, 2, h) ||
      !read_int(s, 14, 2, mi) || !read_int(s, 17, 2, sec)) {
    return std::nullopt;
  }
  return build(y, mo, d, h, mi, sec);
}

std::string format_iso_timestamp(Instant t) {
  const auto f = split(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", f.year, f.month, f.day, f.hour, f.minute, f.second);
  return buf;
}

std::optional<Instant> parse_iso_timestamp(std::string_view s) {
  int y, mo, d, h, mi, sec;
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z') {
    return std::nullopt;
  }
  if (!read_int(s, 0, 4, y) || !read_int(s, 5, 2, mo) || !read_int(s, 8, 2, d) || !read_int(s, 11, 2, h) ||
      !read_int(s, 14, 2, mi) || !read_int(s, 17, 2, sec)) {
    return std::nullopt;
  }
  return build(y, mo, d, h, mi, sec);
}

Instant make_instant(int year, unsigned month, unsigned day, int hour, int minute, int second) {
  auto t = build(year, static_cast<int>(month), static_cast<int>(day), hour, minute, second);
  if (!t) throw std::invalid_argument("invalid calendar date");
  return *t;
}

}  // namespace talechat
