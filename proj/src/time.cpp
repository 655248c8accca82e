#include "dasim/time.hpp"

#include <cmath>
#include <cstdio>

namespace dasim {
namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < width; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<TimePoint> parse_timestamp(std::string_view s, std::optional<int> default_offset) {
  using namespace std::chrono;
  int y, mo, d, h, mi, se;
  if (!read_int(s, 0, 4, y) || s.size() < 19 || s[4] != '-' || !read_int(s, 5, 2, mo) ||
      s[7] != '-' || !read_int(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') ||
      !read_int(s, 11, 2, h) || s[13] != ':' || !read_int(s, 14, 2, mi) || s[16] != ':' ||
      !read_int(s, 17, 2, se))
    return std::nullopt;
  if (h > 23 || mi > 59 || se > 60) return std::nullopt;

  std::size_t pos = 19;
  int millis = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (int i = digits; i < 3; ++i) millis *= 10;
  }

  std::optional<int> offset_min;
  if (pos < s.size()) {
    char z = s[pos];
    if (z == 'Z' || z == 'z') {
      offset_min = 0;
      ++pos;
    } else if (z == '+' || z == '-') {
      int oh, om;
      if (!read_int(s, pos + 1, 2, oh)) return std::nullopt;
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      if (!read_int(s, mpos, 2, om)) return std::nullopt;
      offset_min = (z == '-' ? -1 : 1) * (oh * 60 + om);
      pos = mpos + 2;
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;
  if (!offset_min) {
    if (!default_offset) return std::nullopt;
    offset_min = *default_offset;
  }

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  TimePoint t = time_point_cast<Millis>(sys_days{ymd}) + hours{h} + minutes{mi} + seconds{se} +
                Millis{millis} - minutes{*offset_min};
  return t;
}

std::string format_timestamp(TimePoint t) {
  using namespace std::chrono;
  auto day_start = floor<days>(t);
  year_month_day ymd{day_start};
  auto ms = (t - day_start).count();
  long long h = ms / 3'600'000;
  long long mi = ms / 60'000 % 60;
  long long se = ms / 1000 % 60;
  long long frac = ms % 1000;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), h, mi, se, frac);
  return buf;
}

Millis seconds_to_millis(double seconds) {
  if (!(seconds > 0.0)) return Millis{0};
  double ms = std::round(seconds * 1000.0);
  if (ms > 9.0e15) ms = 9.0e15;
  return Millis{static_cast<long long>(ms)};
}

}  // namespace dasim
