#include "relevo/time.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace relevo {
namespace {

constexpr std::array<const char*, 7> kWeekdayNames = {
    "Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

// Days from 1970-01-01 to 2001-01-01 (a Monday).
constexpr long kEpochOffset1970 = 11323;

// Howard Hinnant's civil-date algorithm.
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long yr = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yr + (m <= 2));
}

bool parse_hhmmss(const char* p, double& day_fraction, const char** rest) {
  int h = 0, mi = 0;
  double sec = 0.0;
  int consumed = 0;
  if (std::sscanf(p, "%d:%d%n", &h, &mi, &consumed) != 2) return false;
  p += consumed;
  if (*p == ':') {
    char* end = nullptr;
    sec = std::strtod(p + 1, &end);
    if (end == p + 1) return false;
    p = end;
  }
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 60.0) return false;
  day_fraction = (h * 3600.0 + mi * 60.0 + sec) / kSecondsPerDay;
  if (rest) *rest = p;
  return true;
}

}  // namespace

std::optional<int> parse_weekday(const std::string& name) {
  if (name.size() < 3) return std::nullopt;
  std::string low;
  for (char c : name) low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  static constexpr std::array<const char*, 7> kFull = {
      "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
  for (int i = 0; i < 7; ++i) {
    if (low == std::string(kFull[i]).substr(0, 3) || low == kFull[i]) return i;
  }
  return std::nullopt;
}

const char* weekday_name(int dow) { return kWeekdayNames.at(static_cast<size_t>(dow)); }

double cycle_phase(TimePoint t, double period) {
  double phase = t - period * std::floor(t / period);
  if (phase >= period) phase -= period;  // guard against floor rounding
  if (phase < 0.0) phase = 0.0;
  return phase;
}

std::optional<double> parse_week_phase(const std::string& text) {
  size_t space = text.find(' ');
  if (space == std::string::npos) return std::nullopt;
  auto dow = parse_weekday(text.substr(0, space));
  if (!dow) return std::nullopt;
  double frac = 0.0;
  if (!parse_hhmmss(text.c_str() + space + 1, frac, nullptr)) return std::nullopt;
  return *dow + frac;
}

std::optional<TimePoint> parse_iso8601(const std::string& text) {
  int y = 0, mo = 0, d = 0;
  int consumed = 0;
  const char* p = text.c_str();
  char dash = 0;
  // Accept both 2001-03-31 and 2001/3/31.
  if (std::sscanf(p, "%d%c%d%c%d%n", &y, &dash, &mo, &dash, &d, &consumed) != 5) return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  p += consumed;
  double frac = 0.0;
  if (*p == 'T' || *p == ' ' || *p == ':') {
    if (!parse_hhmmss(p + 1, frac, &p)) return std::nullopt;
  }
  if (*p == 'Z') ++p;
  if (*p != '\0') return std::nullopt;
  return static_cast<double>(days_from_civil(y, mo, d) - kEpochOffset1970) + frac;
}

std::string format_iso8601(TimePoint t) {
  double day = std::floor(t);
  long secs = std::lround((t - day) * kSecondsPerDay);
  if (secs >= 86400) {  // rounded up across midnight
    secs -= 86400;
    day += 1.0;
  }
  int y;
  unsigned mo, d;
  civil_from_days(static_cast<long>(day) + kEpochOffset1970, y, mo, d);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", y, mo, d,
                secs / 3600, (secs / 60) % 60, secs % 60);
  return buf;
}

std::string format_hms(Duration d) {
  const char* sign = d < 0 ? "-" : "";
  long secs = std::lround(std::fabs(d) * kSecondsPerDay);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%ld:%02ld:%02ld", sign, secs / 3600, (secs / 60) % 60,
                secs % 60);
  return buf;
}

}  // namespace relevo
