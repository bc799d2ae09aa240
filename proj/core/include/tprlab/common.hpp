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

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace tprlab {

// ---------------------------------------------------------------------------
// Wall-clock timestamps. Departures are local wall-clock times; no time zone
// is attached, so they are carried as seconds on the civil calendar.
// ---------------------------------------------------------------------------
using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DDTHH:MM[:SS]` (a space may replace `T`). Throws ParseError.
Timestamp parse_iso8601(std::string_view text);
std::string format_iso8601(Timestamp ts);

/// Day of week with Monday = 0 ... Sunday = 6.
int day_of_week(Timestamp ts);
/// Minutes elapsed since local midnight, in [0, 1440).
int minute_of_day(Timestamp ts);
/// Midnight of the calendar day containing `ts`.
Timestamp start_of_day(Timestamp ts);
Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour = 0,
                         int minute = 0, int second = 0);

// ---------------------------------------------------------------------------
// Randomness. Every stream is derived from one root seed by name so that
// adding a consumer never perturbs the others.
// ---------------------------------------------------------------------------
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);
inline Rng make_rng(std::uint64_t root, std::string_view stream) {
  return Rng(derive_seed(root, stream));
}

std::string to_hex(std::uint64_t v);

// ---------------------------------------------------------------------------
// Parallelism
// ---------------------------------------------------------------------------

/// Worker count: TPRLAB_THREADS if set (>= 1), else hardware concurrency.
int thread_budget();

/// Runs fn(i) for i in [0, n) on up to thread_budget() threads. Work is split
/// in contiguous blocks; results must not depend on the split.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);
/// Exact decimal rendering of a double (17 significant digits).
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

}  // namespace tprlab
