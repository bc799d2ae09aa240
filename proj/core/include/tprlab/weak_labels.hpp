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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "tprlab/common.hpp"
#include "tprlab/temporal_graph.hpp"

namespace tprlab {

enum class LabelScheme { pop, tci };

std::string_view to_string(LabelScheme scheme);
LabelScheme parse_label_scheme(std::string_view name);

/// Peak/off-peak classes.
enum PopClass : int { kMorningPeak = 0, kAfternoonPeak = 1, kOffPeak = 2 };

struct WeakLabel {
  LabelScheme scheme = LabelScheme::pop;
  int value = kOffPeak;

  bool operator==(const WeakLabel&) const = default;
};

inline constexpr int kTciLevels = 4;

/// Weekdays [07:00, 09:00) are morning peak, [16:00, 19:00) afternoon peak,
/// everything else (including weekends) off-peak.
WeakLabel pop_label(Timestamp ts);
bool in_peak_window(Timestamp ts);

/// Congestion level 0..3 for each of the 2016 weekly time slots.
class TCITable {
 public:
  TCITable() { levels_.fill(0); }

  int level(TimeSlot slot) const { return levels_[static_cast<std::size_t>(slot.index())]; }
  void set_level(TimeSlot slot, int level);

  bool operator==(const TCITable&) const = default;

 private:
  std::array<std::uint8_t, kTemporalNodes> levels_;
};

WeakLabel tci_label(Timestamp ts, const TCITable& table);

/// CSV `day,slot,level` with a header row and exactly 2016 data rows
/// covering every (day, slot) once.
TCITable read_tci_table(std::istream& in, const std::string& source_name);
TCITable load_tci_table(const std::filesystem::path& file);
void write_tci_table(std::ostream& out, const TCITable& table, std::string_view config_hash = {});

/// Labels departures under one scheme.
class WeakLabeler {
 public:
  WeakLabeler() = default;
  explicit WeakLabeler(TCITable table) : scheme_(LabelScheme::tci), table_(table) {}

  LabelScheme scheme() const { return scheme_; }
  WeakLabel operator()(Timestamp ts) const {
    return scheme_ == LabelScheme::pop ? pop_label(ts) : tci_label(ts, table_);
  }

 private:
  LabelScheme scheme_ = LabelScheme::pop;
  TCITable table_;
};

/// A departure on the same calendar day as `ts`, with the same weak label and
/// a different timestamp.
Timestamp resample_departure(Timestamp ts, const WeakLabeler& labeler, Rng& rng);

/// A departure within three days of `ts` whose weak label differs from the
/// label of `ts`; empty when the scheme assigns one label to the whole window.
std::optional<Timestamp> contrast_departure(Timestamp ts, const WeakLabeler& labeler, Rng& rng);

}  // namespace tprlab
