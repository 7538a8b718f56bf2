#include "nalloc/dates.hpp"

#include <cctype>
#include <cstdio>

#include "nalloc/error.hpp"

namespace nalloc {

namespace {

bool all_digits(const std::string& s, size_t begin, size_t end) {
  for (size_t i = begin; i < end; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

}  // namespace

Date parse_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !all_digits(text, 0, 4) || !all_digits(text, 5, 7) ||
      !all_digits(text, 8, 10)) {
    throw Error(ErrorCode::MalformedRow, "bad date '" + text + "'");
  }
  const int y = std::stoi(text.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(text.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(text.substr(8, 2)));
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::MalformedRow, "invalid calendar date '" + text + "'");
  }
  return Date{ymd};
}

std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

bool is_weekday(Date date) {
  const std::chrono::weekday wd{date};
  return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

Date next_weekday(Date date) {
  do {
    date += std::chrono::days{1};
  } while (!is_weekday(date));
  return date;
}

Date prev_weekday(Date date) {
  do {
    date -= std::chrono::days{1};
  } while (!is_weekday(date));
  return date;
}

}  // namespace nalloc
