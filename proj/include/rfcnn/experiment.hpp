/*
 * Copyright 2026 The rfcnn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RFCNN_EXPERIMENT_HPP_
#define RFCNN_EXPERIMENT_HPP_

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfcnn/config.hpp"
#include "rfcnn/dataset.hpp"
#include "rfcnn/rfcalc.hpp"
#include "rfcnn/train.hpp"

namespace rfcnn::exp {

inline constexpr std::string_view kVersion = "rfcnn 0.1.0";

// --- published receptive-field table ---------------------------------------

struct Table2Row {
  int rho = 0;
  rf::MaxRf computed;
  long published = 0;
  bool ok = false;
};

struct Table2Result {
  std::vector<Table2Row> rows;
  std::vector<int> mismatched;
  bool ok() const { return mismatched.empty(); }
};

/// `mutate` edits each spec before analysis (fault injection for tests).
using SpecMutation = std::function<void(arch::NetworkSpec&)>;

Table2Result check_table2(const SpecMutation& mutate = {});
std::string format_table2(const Table2Result& r);

// --- training runs ------------------------------------------------------------

arch::NetworkSpec spec_from_config(const cfg::Config& c, int rho, arch::Variant variant,
                                   int num_classes, int in_channels);

struct RunOutput {
  train::TrainReport report;
  arch::NetworkSpec spec;
};

/// Fits normalization on `train_set` only, builds the network and trains.
/// With a non-empty out_dir, writes config.txt, spec.txt, report.txt,
/// summary.txt and a ring of the last keep_last checkpoints.
RunOutput run_training(const cfg::Config& c, const data::ClipSet& train_set,
                       const data::ClipSet& test_set, std::uint64_t seed,
                       const std::string& out_dir = {},
                       const std::optional<arch::NetworkSpec>& spec = std::nullopt);

std::string format_summary(const train::Summary& s, int k, std::size_t runs);

/// Writes config.txt (effective config) and VERSION into dir.
void echo_config(const std::string& dir, const cfg::Config& c);

// --- grid -------------------------------------------------------------------

struct GridCell {
  int rho = 0;
  arch::Variant variant = arch::Variant::Plain;
  bool ok = false;
  std::string error;
  train::Summary summary;
};

struct GridResult {
  std::vector<GridCell> cells;
  /// Index of the cell with the highest mean accuracy, or -1.
  int best = -1;
};

using CellHook = std::function<void(const GridCell&)>;

/// Run r of every cell uses seed c.seed + r. A failing cell is recorded and
/// the grid continues.
GridResult run_grid(const cfg::Config& c, const data::ClipSet& train_set,
                    const data::ClipSet& test_set, const std::string& out_dir = {},
                    const CellHook& hook = {});

std::string format_grid(const GridResult& g);
/// Tab-separated, one row per cell, for plotting.
std::string grid_tsv(const GridResult& g);

}  // namespace rfcnn::exp

#endif  // RFCNN_EXPERIMENT_HPP_
