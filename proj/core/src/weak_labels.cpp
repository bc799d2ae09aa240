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

#include "tprlab/weak_labels.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <vector>

#include "tprlab/error.hpp"

namespace tprlab {

std::string_view to_string(LabelScheme scheme) { return scheme == LabelScheme::pop ? "pop" : "tci"; }

LabelScheme parse_label_scheme(std::string_view name) {
  if (name == "pop") return LabelScheme::pop;
  if (name == "tci") return LabelScheme::tci;
  throw ConfigError("unknown weak-label scheme '" + std::string(name) + "' (expected pop or tci)");
}

WeakLabel pop_label(Timestamp ts) {
  const int day = day_of_week(ts);
  const int minute = minute_of_day(ts);
  if (day < 5) {
    if (minute >= 7 * 60 && minute < 9 * 60) return {LabelScheme::pop, kMorningPeak};
    if (minute >= 16 * 60 && minute < 19 * 60) return {LabelScheme::pop, kAfternoonPeak};
  }
  return {LabelScheme::pop, kOffPeak};
}

bool in_peak_window(Timestamp ts) { return pop_label(ts).value != kOffPeak; }

void TCITable::set_level(TimeSlot slot, int level) {
  if (level < 0 || level >= kTciLevels) throw ConfigError("TCI level out of range");
  if (slot.day < 0 || slot.day >= kDaysPerWeek || slot.slot < 0 || slot.slot >= kSlotsPerDay)
    throw LookupError("TCI slot out of range");
  levels_[static_cast<std::size_t>(slot.index())] = static_cast<std::uint8_t>(level);
}

WeakLabel tci_label(Timestamp ts, const TCITable& table) {
  return {LabelScheme::tci, table.level(departure_to_node(ts))};
}

TCITable read_tci_table(std::istream& in, const std::string& source_name) {
  TCITable table;
  std::vector<bool> seen(kTemporalNodes, false);
  std::string line;
  std::size_t lineno = 0, rows = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      auto cols = split(t, ',');
      if (cols.size() != 3 || cols[0] != "day" || cols[1] != "slot" || cols[2] != "level")
        throw ParseError(source_name, lineno, "expected header 'day,slot,level'");
      header_seen = true;
      continue;
    }
    auto cols = split(t, ',');
    if (cols.size() != 3) throw ParseError(source_name, lineno, "expected 3 fields");
    try {
      TimeSlot s{static_cast<int>(parse_int(cols[0])), static_cast<int>(parse_int(cols[1]))};
      int level = static_cast<int>(parse_int(cols[2]));
      if (s.day < 0 || s.day >= kDaysPerWeek || s.slot < 0 || s.slot >= kSlotsPerDay)
        throw ParseError("day/slot out of range");
      if (level < 0 || level >= kTciLevels) throw ParseError("level out of range");
      if (seen[static_cast<std::size_t>(s.index())]) throw ParseError("duplicate (day, slot)");
      seen[static_cast<std::size_t>(s.index())] = true;
      table.set_level(s, level);
      ++rows;
    } catch (const Error& e) {
      throw ParseError(source_name, lineno, e.what());
    }
  }
  if (rows != static_cast<std::size_t>(kTemporalNodes))
    throw IntegrityError(source_name + ": TCI table must have exactly 2016 rows, got " + std::to_string(rows));
  return table;
}

TCITable load_tci_table(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ArtifactError("cannot open TCI table " + file.string());
  return read_tci_table(in, file.string());
}

void write_tci_table(std::ostream& out, const TCITable& table, std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "day,slot,level\n";
  for (int d = 0; d < kDaysPerWeek; ++d)
    for (int s = 0; s < kSlotsPerDay; ++s) out << d << ',' << s << ',' << table.level({d, s}) << '\n';
}

Timestamp resample_departure(Timestamp ts, const WeakLabeler& labeler, Rng& rng) {
  const WeakLabel want = labeler(ts);
  const Timestamp day = start_of_day(ts);
  std::uniform_int_distribution<int> second_of_day(0, 24 * 3600 - 1);
  for (int attempt = 0; attempt < 256; ++attempt) {
    Timestamp cand = day + std::chrono::seconds(second_of_day(rng));
    if (cand != ts && labeler(cand) == want) return cand;
  }
  // Narrow windows: scan the day for any other second with the same label,
  // starting from a random offset.
  const int start = second_of_day(rng);
  for (int k = 0; k < 24 * 3600; ++k) {
    Timestamp cand = day + std::chrono::seconds((start + k) % (24 * 3600));
    if (cand != ts && labeler(cand) == want) return cand;
  }
  throw ContractViolation("resample_departure: label window contains a single instant");
}

std::optional<Timestamp> contrast_departure(Timestamp ts, const WeakLabeler& labeler, Rng& rng) {
  const WeakLabel own = labeler(ts);
  const Timestamp first = start_of_day(ts) - std::chrono::days(3);
  constexpr int kWindow = 7 * 24 * 3600;
  std::uniform_int_distribution<int> offset(0, kWindow - 1);
  for (int attempt = 0; attempt < 256; ++attempt) {
    Timestamp cand = first + std::chrono::seconds(offset(rng));
    if (labeler(cand) != own) return cand;
  }
  // Labels are constant within a slot, so one probe per slot is exhaustive.
  const int start = offset(rng) / (kMinutesPerSlot * 60);
  constexpr int kSlots = kWindow / (kMinutesPerSlot * 60);
  for (int k = 0; k < kSlots; ++k) {
    Timestamp cand = first + std::chrono::minutes(((start + k) % kSlots) * kMinutesPerSlot);
    if (labeler(cand) != own) return cand;
  }
  return std::nullopt;
}

}  // namespace tprlab
