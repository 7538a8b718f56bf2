#pragma once

#include <chrono>
#include <string>

namespace nalloc {

/// Calendar date, resolution one day.
using Date = std::chrono::sys_days;

/// Parses strict ISO-8601 `YYYY-MM-DD`. Throws Error(MalformedRow) on
/// anything else, including calendar-invalid dates like 2021-02-30.
Date parse_date(const std::string& text);

/// Formats as `YYYY-MM-DD`.
std::string format_date(Date date);

bool is_weekday(Date date);

/// Next weekday strictly after `date` (Fri -> Mon).
Date next_weekday(Date date);

/// Last weekday strictly before `date` (Mon -> Fri).
Date prev_weekday(Date date);

}  // namespace nalloc
