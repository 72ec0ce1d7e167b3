#pragma once

#include <optional>
#include <string>

namespace relevo {

// Model time is a real number of days. Day 0.0 is Monday 2001-01-01 00:00:00
// UTC, so the phase of a weekly recurrent rate is just t mod 7 with no
// weekday offset. Times before the epoch are simply negative.
using TimePoint = double;
using Duration = double;

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kWeekDays = 7.0;

constexpr Duration hours(double h) { return h / 24.0; }
constexpr Duration minutes(double m) { return m / 1440.0; }
constexpr Duration seconds(double s) { return s / kSecondsPerDay; }

// Weekday index, Monday = 0 .. Sunday = 6. Accepts "Mon", "monday", etc.
std::optional<int> parse_weekday(const std::string& name);
const char* weekday_name(int dow);

// Phase of t within [0, period); correct for negative t.
double cycle_phase(TimePoint t, double period);

// "Dow HH:MM" or "Dow HH:MM:SS" -> fractional days into the week.
std::optional<double> parse_week_phase(const std::string& text);

// ISO-8601 UTC timestamp ("YYYY-MM-DD[T ]HH:MM:SS[.frac][Z]"; the time part
// may be omitted) to model days, and back. Formatting rounds to whole
// seconds.
std::optional<TimePoint> parse_iso8601(const std::string& text);
std::string format_iso8601(TimePoint t);

// Durations as [-]H:MM:SS (hours may exceed 24).
std::string format_hms(Duration d);

}  // namespace relevo
