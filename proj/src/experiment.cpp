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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfcnn/checkpoint.hpp"
#include "rfcnn/experiment.hpp"

namespace rfcnn::exp {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << s;
}

std::string checkpoint_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%04d.rfck", epoch);
  return buf;
}

std::vector<dsp::SpectrogramClip> normalized(const std::vector<dsp::SpectrogramClip>& clips,
                                             const dsp::NormStats& st) {
  std::vector<dsp::SpectrogramClip> out;
  out.reserve(clips.size());
  for (const auto& c : clips) out.push_back(dsp::apply_norm(c, st));
  return out;
}

}  // namespace

Table2Result check_table2(const SpecMutation& mutate) {
  Table2Result r;
  for (int rho = 0; rho < static_cast<int>(rf::kPublishedMaxRf.size()); ++rho) {
    arch::NetworkSpec spec = arch::make_network(arch::Rho(rho), arch::Variant::Plain, 10, 1, 2);
    if (mutate) mutate(spec);
    Table2Row row;
    row.rho = rho;
    row.computed = rf::max_rf(spec);
    row.published = rf::kPublishedMaxRf[static_cast<std::size_t>(rho)];
    row.ok = row.computed.f == row.published && row.computed.t == row.published;
    if (!row.ok) r.mismatched.push_back(rho);
    r.rows.push_back(row);
  }
  return r;
}

std::string format_table2(const Table2Result& r) {
  std::ostringstream os;
  os << "rho  computed    published  status\n";
  char buf[96];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%3d  %4ldx%-4ld   %4ldx%-4ld  %s\n", row.rho, row.computed.f,
                  row.computed.t, row.published, row.published, row.ok ? "ok" : "MISMATCH");
    os << buf;
  }
  if (r.ok()) {
    os << "all " << r.rows.size() << " rows match\n";
  } else {
    os << r.mismatched.size() << " mismatch(es) at rho =";
    for (int rho : r.mismatched) os << ' ' << rho;
    os << '\n';
  }
  return os.str();
}

arch::NetworkSpec spec_from_config(const cfg::Config& c, int rho, arch::Variant variant,
                                   int num_classes, int in_channels) {
  arch::NetworkSpec s =
      arch::make_network(arch::Rho(rho), variant, num_classes, c.base_width, in_channels);
  s.freq_mode = c.freq_mode;
  s.shake_level = c.shake_level;
  arch::validate(s);
  return s;
}

void echo_config(const std::string& dir, const cfg::Config& c) {
  fs::create_directories(dir);
  write_text(fs::path(dir) / "config.txt", cfg::format_config(c));
  write_text(fs::path(dir) / "VERSION", std::string(kVersion) + "\n");
}

std::string format_summary(const train::Summary& s, int k, std::size_t runs) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "last_k=%d\nruns=%zu\ncount=%zu\nmean_acc=%.6f\nstd_acc=%.6f\n"
                "mean_loss=%.6f\nstd_loss=%.6f\n",
                k, runs, s.count, s.mean_acc, s.std_acc, s.mean_loss, s.std_loss);
  return buf;
}

RunOutput run_training(const cfg::Config& c, const data::ClipSet& train_set,
                       const data::ClipSet& test_set, std::uint64_t seed,
                       const std::string& out_dir, const std::optional<arch::NetworkSpec>& spec) {
  if (train_set.clips.empty() || test_set.clips.empty()) {
    throw data::DataError("training and test sets must be non-empty");
  }
  const int classes = static_cast<int>(train_set.classes.size());
  const dsp::NormStats st = dsp::fit_norm(train_set.clips, c.norm);
  const auto train_clips = normalized(train_set.clips, st);
  const auto test_clips = normalized(test_set.clips, st);
  const data::Dataset train_ds = data::stack(train_clips, classes);
  const data::Dataset test_ds = data::stack(test_clips, classes);

  RunOutput out;
  out.spec = spec ? *spec
                  : spec_from_config(c, c.rho, c.variant, classes,
                                     static_cast<int>(train_ds.x.channels()));
  if (out.spec.num_classes != classes) {
    throw arch::SpecError("spec has " + std::to_string(out.spec.num_classes) +
                          " classes, data has " + std::to_string(classes));
  }
  auto net = model::Network<float>::init(out.spec, seed);
  train::TrainConfig tc = c.train_config();
  tc.seed = seed;

  train::EpochHook hook;
  std::vector<model::NamedTensor<float>> extras;
  if (!out_dir.empty()) {
    echo_config(out_dir, c);
    write_text(fs::path(out_dir) / "spec.txt", arch::serialize_spec(out.spec));
    dsp::save_norm((fs::path(out_dir) / "norm").string(), st);
    extras.push_back({"norm.mean", st.mean.cast<float>()});
    extras.push_back({"norm.std", st.std.cast<float>()});
    hook = [&](const train::EpochRecord& rec, model::Network<float>& n) {
      const fs::path dir(out_dir);
      model::save_checkpoint((dir / checkpoint_name(rec.epoch)).string(), n, extras);
      const int stale = rec.epoch - std::max(tc.keep_last, 1);
      if (stale >= 1) fs::remove(dir / checkpoint_name(stale));
    };
  }
  out.report = train::train_loop(net, train_ds, test_ds, tc, hook);
  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "report.txt", train::format_report(out.report));
    const int k = std::min<int>(c.last_k, static_cast<int>(out.report.epochs.size()));
    const train::Summary s = train::summarize_last_k(std::span(&out.report, 1), k);
    write_text(fs::path(out_dir) / "summary.txt", format_summary(s, k, 1));
  }
  return out;
}

GridResult run_grid(const cfg::Config& c, const data::ClipSet& train_set,
                    const data::ClipSet& test_set, const std::string& out_dir,
                    const CellHook& hook) {
  GridResult g;
  if (!out_dir.empty()) echo_config(out_dir, c);
  for (int rho : c.grid_rhos) {
    for (arch::Variant v : c.grid_variants) {
      GridCell cell;
      cell.rho = rho;
      cell.variant = v;
      try {
        std::vector<train::TrainReport> reports;
        for (int r = 0; r < c.runs; ++r) {
          std::string dir;
          if (!out_dir.empty()) {
            dir = (fs::path(out_dir) /
                   ("rho" + std::to_string(rho) + "_" + std::string(arch::to_string(v))) /
                   ("run" + std::to_string(r)))
                      .string();
          }
          const int channels = static_cast<int>(train_set.clips.at(0).values.channels());
          const auto spec = spec_from_config(c, rho, v, static_cast<int>(train_set.classes.size()),
                                             channels);
          reports.push_back(
              run_training(c, train_set, test_set, c.seed + static_cast<std::uint64_t>(r), dir, spec)
                  .report);
        }
        cell.summary = train::summarize_last_k(reports, c.last_k);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      if (hook) hook(cell);
      g.cells.push_back(cell);
    }
  }
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    if (!g.cells[i].ok) continue;
    if (g.best < 0 || g.cells[i].summary.mean_acc >
                          g.cells[static_cast<std::size_t>(g.best)].summary.mean_acc) {
      g.best = static_cast<int>(i);
    }
  }
  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "grid.txt", format_grid(g));
    write_text(fs::path(out_dir) / "grid.tsv", grid_tsv(g));
  }
  return g;
}

std::string format_grid(const GridResult& g) {
  std::ostringstream os;
  os << "rho  variant      accuracy            loss                n   best\n";
  char buf[160];
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    const auto& c = g.cells[i];
    if (!c.ok) {
      std::snprintf(buf, sizeof buf, "%3d  %-11s  FAILED: %s\n", c.rho,
                    std::string(arch::to_string(c.variant)).c_str(), c.error.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%3d  %-11s  %.4f +- %.4f   %.4f +- %.4f   %3zu  %s\n",
                    c.rho, std::string(arch::to_string(c.variant)).c_str(), c.summary.mean_acc,
                    c.summary.std_acc, c.summary.mean_loss, c.summary.std_loss, c.summary.count,
                    static_cast<int>(i) == g.best ? "*" : "");
    }
    os << buf;
  }
  return os.str();
}

std::string grid_tsv(const GridResult& g) {
  std::ostringstream os;
  os << "rho\tvariant\tok\tmean_acc\tstd_acc\tmean_loss\tstd_loss\tcount\tbest\n";
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    const auto& c = g.cells[i];
    os << c.rho << '\t' << arch::to_string(c.variant) << '\t' << (c.ok ? 1 : 0) << '\t'
       << c.summary.mean_acc << '\t' << c.summary.std_acc << '\t' << c.summary.mean_loss << '\t'
       << c.summary.std_loss << '\t' << c.summary.count << '\t'
       << (static_cast<int>(i) == g.best ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace rfcnn::exp
