#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace stmc {

using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

constexpr Duration days(long long n) { return std::chrono::hours(24 * n); }

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS[.frac]]" with optional "Z" or
/// "+HH[:]MM" offset; a space may replace the "T". Returns nullopt when the
/// text is not a valid ISO-8601 timestamp. Fractions are truncated.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// Parses an RFC 5322 date ("Tue, 1 Jul 2003 10:52:37 +0200"), including the
/// obsolete alphabetic zones (UT, GMT, EST, ...).
std::optional<Timestamp> parse_rfc5322_date(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Timestamp t);

/// "Tue, 01 Jul 2003 10:52:37 +0000".
std::string format_rfc5322_date(Timestamp t);

}  // namespace stmc
