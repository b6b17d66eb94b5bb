#include "stmc/time.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace stmc {
namespace {

using namespace std::chrono;

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  void skip_spaces() {
    while (!done() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool consume(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  // Reads between min_digits and max_digits decimal digits.
  std::optional<int> digits(int min_digits, int max_digits) {
    int value = 0;
    int n = 0;
    while (n < max_digits && !done() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      value = value * 10 + (s_[pos_] - '0');
      ++pos_;
      ++n;
    }
    if (n < min_digits) return std::nullopt;
    return value;
  }
  std::string_view word() {
    std::size_t start = pos_;
    while (!done() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  std::string_view rest() const { return s_.substr(std::min(pos_, s_.size())); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::optional<Timestamp> make_time(int y, int mo, int d, int h, int mi, int s,
                                   int offset_minutes) {
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  auto t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} -
           minutes{offset_minutes};
  return time_point_cast<seconds>(t);
}

// "+HH:MM", "+HHMM", "+HH", "Z"; returns minutes east of UTC.
std::optional<int> numeric_offset(Cursor& c) {
  if (c.consume('Z') || c.consume('z')) return 0;
  int sign = 0;
  if (c.consume('+')) sign = 1;
  else if (c.consume('-')) sign = -1;
  else return std::nullopt;
  auto hh = c.digits(2, 2);
  if (!hh) return std::nullopt;
  c.consume(':');
  int mm = 0;
  if (auto m = c.digits(2, 2)) mm = *m;
  if (*hh > 23 || mm > 59) return std::nullopt;
  return sign * (*hh * 60 + mm);
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

constexpr std::array<std::string_view, 12> kMonths = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
constexpr std::array<std::string_view, 7> kWeekdays = {
    "Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};

std::optional<int> zone_offset(std::string_view name) {
  struct Zone {
    std::string_view name;
    int minutes;
  };
  static constexpr Zone kZones[] = {
      {"UT", 0},       {"UTC", 0},      {"GMT", 0},      {"Z", 0},
      {"EST", -5 * 60}, {"EDT", -4 * 60}, {"CST", -6 * 60}, {"CDT", -5 * 60},
      {"MST", -7 * 60}, {"MDT", -6 * 60}, {"PST", -8 * 60}, {"PDT", -7 * 60}};
  for (const auto& z : kZones)
    if (iequals(z.name, name)) return z.minutes;
  return std::nullopt;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  Cursor c(text);
  c.skip_spaces();
  auto y = c.digits(4, 4);
  if (!y || !c.consume('-')) return std::nullopt;
  auto mo = c.digits(2, 2);
  if (!mo || !c.consume('-')) return std::nullopt;
  auto d = c.digits(2, 2);
  if (!d) return std::nullopt;
  int h = 0, mi = 0, s = 0, offset = 0;
  if (c.consume('T') || c.consume('t') || c.consume(' ')) {
    auto hh = c.digits(2, 2);
    if (!hh || !c.consume(':')) return std::nullopt;
    auto mm = c.digits(2, 2);
    if (!mm) return std::nullopt;
    h = *hh;
    mi = *mm;
    if (c.consume(':')) {
      auto ss = c.digits(2, 2);
      if (!ss) return std::nullopt;
      s = *ss;
      if (c.consume('.') || c.consume(',')) {
        if (!c.digits(1, 12)) return std::nullopt;
      }
    }
    c.skip_spaces();
    if (!c.done()) {
      auto off = numeric_offset(c);
      if (!off) return std::nullopt;
      offset = *off;
    }
  }
  c.skip_spaces();
  if (!c.done()) return std::nullopt;
  return make_time(*y, *mo, *d, h, mi, s, offset);
}

std::optional<Timestamp> parse_rfc5322_date(std::string_view text) {
  Cursor c(text);
  c.skip_spaces();
  // Optional day-of-week.
  if (std::isalpha(static_cast<unsigned char>(c.peek()))) {
    auto dow = c.word();
    bool known = false;
    for (auto w : kWeekdays) known = known || iequals(w, dow);
    if (!known) return std::nullopt;
    c.skip_spaces();
    if (!c.consume(',')) return std::nullopt;
    c.skip_spaces();
  }
  auto d = c.digits(1, 2);
  if (!d) return std::nullopt;
  c.skip_spaces();
  auto mon = c.word();
  int mo = 0;
  for (std::size_t i = 0; i < kMonths.size(); ++i)
    if (iequals(kMonths[i], mon)) mo = static_cast<int>(i) + 1;
  if (mo == 0) return std::nullopt;
  c.skip_spaces();
  auto y = c.digits(2, 4);
  if (!y) return std::nullopt;
  if (*y < 50) *y += 2000;
  else if (*y < 1000) *y += 1900;
  c.skip_spaces();
  auto hh = c.digits(1, 2);
  if (!hh || !c.consume(':')) return std::nullopt;
  auto mm = c.digits(2, 2);
  if (!mm) return std::nullopt;
  int s = 0;
  if (c.consume(':')) {
    auto ss = c.digits(2, 2);
    if (!ss) return std::nullopt;
    s = *ss;
  }
  c.skip_spaces();
  int offset = 0;
  if (c.peek() == '+' || c.peek() == '-') {
    auto off = numeric_offset(c);
    if (!off) return std::nullopt;
    offset = *off;
  } else if (!c.done() && c.peek() != '(') {
    auto zone = zone_offset(c.word());
    if (!zone) return std::nullopt;
    offset = *zone;
  }
  // A trailing comment such as "(PST)" is ignored.
  return make_time(*y, mo, *d, *hh, *mm, s, offset);
}

std::string format_iso8601(Timestamp t) {
  auto dp = std::chrono::floor<std::chrono::days>(t);
  std::chrono::year_month_day ymd{dp};
  std::chrono::hh_mm_ss hms{t - dp};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string format_rfc5322_date(Timestamp t) {
  auto dp = std::chrono::floor<std::chrono::days>(t);
  std::chrono::year_month_day ymd{dp};
  std::chrono::weekday wd{dp};
  std::chrono::hh_mm_ss hms{t - dp};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s, %02u %s %04d %02d:%02d:%02d +0000",
                std::string(kWeekdays[wd.c_encoding()]).c_str(),
                static_cast<unsigned>(ymd.day()),
                std::string(kMonths[static_cast<unsigned>(ymd.month()) - 1]).c_str(),
                static_cast<int>(ymd.year()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

}  // namespace stmc
