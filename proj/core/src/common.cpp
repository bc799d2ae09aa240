// Copyright 2026 The tprlab Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tprlab/common.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "tprlab/error.hpp"

namespace tprlab {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw ParseError("truncated timestamp '" + std::string(text) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') throw ParseError("bad digit in timestamp '" + std::string(text) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed) {
  if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos)
    throw ParseError("malformed timestamp '" + std::string(text) + "'");
}

}  // namespace

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour, int minute, int second) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) throw ParseError("invalid calendar date");
  return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

Timestamp parse_iso8601(std::string_view raw) {
  std::string_view text = trim(raw);
  // YYYY-MM-DDTHH:MM[:SS][Z]
  int y = parse_fixed(text, 0, 4);
  expect_char(text, 4, "-");
  int mo = parse_fixed(text, 5, 2);
  expect_char(text, 7, "-");
  int d = parse_fixed(text, 8, 2);
  expect_char(text, 10, "T ");
  int h = parse_fixed(text, 11, 2);
  expect_char(text, 13, ":");
  int mi = parse_fixed(text, 14, 2);
  int s = 0;
  std::size_t end = 16;
  if (text.size() > 16 && text[16] == ':') {
    s = parse_fixed(text, 17, 2);
    end = 19;
  }
  if (end < text.size() && text[end] == 'Z') ++end;
  if (end != text.size()) throw ParseError("trailing characters in timestamp '" + std::string(text) + "'");
  if (h > 23 || mi > 59 || s > 59) throw ParseError("time of day out of range in '" + std::string(text) + "'");
  if (mo < 1 || mo > 12 || d < 1 || d > 31) throw ParseError("date out of range in '" + std::string(text) + "'");
  return make_timestamp(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h, mi, s);
}

std::string format_iso8601(Timestamp ts) {
  using namespace std::chrono;
  auto day = floor<days>(ts);
  year_month_day ymd{day};
  auto tod = ts - day;
  auto h = duration_cast<hours>(tod).count();
  auto m = duration_cast<minutes>(tod).count() % 60;
  auto s = tod.count() % 60;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(h), static_cast<long long>(m), static_cast<long long>(s));
  return buf;
}

int day_of_week(Timestamp ts) {
  using namespace std::chrono;
  weekday wd{floor<days>(ts)};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

int minute_of_day(Timestamp ts) {
  using namespace std::chrono;
  auto tod = ts - floor<days>(ts);
  return static_cast<int>(duration_cast<minutes>(tod).count());
}

Timestamp start_of_day(Timestamp ts) {
  return std::chrono::floor<std::chrono::days>(ts);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
  return splitmix64(splitmix64(root) ^ fnv1a64(stream));
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(splitmix64(root) + splitmix64(index ^ 0x5851f42d4c957f2dULL));
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

int thread_budget() {
  if (const char* env = std::getenv("TPRLAB_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  std::size_t block = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        std::size_t lo = w * block, hi = std::min(n, lo + block);
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\xEF\xBB\xBF";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  std::string tmp(trim(s));
  if (tmp.empty()) throw ParseError("empty numeric field");
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (end != tmp.c_str() + tmp.size()) throw ParseError("not a number: '" + tmp + "'");
  return v;
}

long long parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("not an integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace tprlab
