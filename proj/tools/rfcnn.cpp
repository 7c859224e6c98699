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

// rfcnn: receptive-field-regularized CNN toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.

#include <glob.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rfcnn/archspec.hpp"
#include "rfcnn/checkpoint.hpp"
#include "rfcnn/config.hpp"
#include "rfcnn/dataset.hpp"
#include "rfcnn/dsp.hpp"
#include "rfcnn/experiment.hpp"
#include "rfcnn/rfcalc.hpp"
#include "rfcnn/synthdata.hpp"
#include "rfcnn/tensor_io.hpp"
#include "rfcnn/train.hpp"

namespace fs = std::filesystem;
using namespace rfcnn;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--config", f.file, "Configuration file (key = value lines)");
  app->add_option("--set", f.sets, "Override one key, e.g. --set mixup.alpha=0.2");
}

cfg::Config resolve(const ConfigFlags& f) {
  cfg::Config c;
  if (!f.file.empty()) c = cfg::load_config(f.file);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg::set(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

/// dir/train + dir/test, or a pair given explicitly.
std::pair<data::ClipSet, data::ClipSet> load_split(const std::string& data_dir,
                                                   const std::string& test_dir) {
  if (!test_dir.empty()) return {data::read_dataset(data_dir), data::read_dataset(test_dir)};
  return {data::read_dataset((fs::path(data_dir) / "train").string()),
          data::read_dataset((fs::path(data_dir) / "test").string())};
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  return out;
}

// --- subcommands --------------------------------------------------------------

struct ArchArgs {
  std::string spec_file;
  int rho = 4;
  std::string variant = "Plain";
  int classes = 10;
  int width = 128;
  int in_channels = 2;
  bool as_spec = false;
};

arch::NetworkSpec arch_spec(const ArchArgs& a) {
  if (!a.spec_file.empty()) {
    std::ifstream is(a.spec_file);
    if (!is) throw data::DataError("cannot open " + a.spec_file);
    std::stringstream ss;
    ss << is.rdbuf();
    return arch::parse_spec(ss.str());
  }
  return arch::make_network(arch::Rho(a.rho), arch::parse_variant(a.variant), a.classes, a.width,
                            a.in_channels);
}

void add_arch_flags(CLI::App* app, ArchArgs& a) {
  app->add_option("--spec", a.spec_file, "Architecture spec file");
  app->add_option("--rho", a.rho, "Receptive-field parameter in [0, 22]");
  app->add_option("--variant", a.variant, "Plain, PreAct, ShakeShake or FreqAware");
  app->add_option("--classes", a.classes, "Number of classes");
  app->add_option("--width", a.width, "Base width");
  app->add_option("--in-channels", a.in_channels, "Input planes");
}

int cmd_arch(const ArchArgs& a) {
  const auto spec = arch_spec(a);
  std::cout << (a.as_spec ? arch::serialize_spec(spec) : arch::format_table(spec));
  return 0;
}

struct RfArgs {
  ArchArgs arch;
  bool table = false;
  bool check = false;
  int rho_min = 0;
  int rho_max = 22;
};

int cmd_rf(const RfArgs& a) {
  if (a.check) {
    const auto r = exp::check_table2();
    std::cout << exp::format_table2(r);
    return r.ok() ? 0 : kExitVerify;
  }
  if (a.table) {
    std::cout << "rho  max_rf\n";
    for (const auto& row : rf::rf_table(a.rho_min, a.rho_max, arch::parse_variant(a.arch.variant))) {
      std::cout << row.rho << "  " << row.rf.f << "x" << row.rf.t << '\n';
    }
    return 0;
  }
  const auto spec = arch_spec(a.arch);
  const auto m = rf::max_rf(spec);
  std::cout << "max_rf_f=" << m.f << "\nmax_rf_t=" << m.t << '\n';
  return 0;
}

struct PreprocessArgs {
  std::string in_dir;
  std::string list;
  std::string out;
  ConfigFlags config;
  std::size_t hop = 0;
  std::size_t mels = 0;
};

int cmd_preprocess(const PreprocessArgs& a) {
  cfg::Config c = resolve(a.config);
  if (a.hop) c.dsp.hop = a.hop;
  if (a.mels) c.dsp.n_mels = a.mels;

  std::vector<std::pair<std::string, std::string>> items;  // path, class name
  if (!a.list.empty()) {
    std::ifstream is(a.list);
    if (!is) throw data::DataError("cannot open " + a.list);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw data::DataError("list line without a tab: " + line);
      fs::path p = line.substr(0, tab);
      if (p.is_relative() && !a.in_dir.empty()) p = fs::path(a.in_dir) / p;
      items.emplace_back(p.string(), line.substr(tab + 1));
    }
  } else if (!a.in_dir.empty()) {
    for (const auto& d : fs::directory_iterator(a.in_dir)) {
      if (!d.is_directory()) continue;
      for (const auto& f : fs::directory_iterator(d.path())) {
        if (f.path().extension() == ".wav") {
          items.emplace_back(f.path().string(), d.path().filename().string());
        }
      }
    }
  } else {
    throw UsageError("preprocess needs --in or --list");
  }
  std::sort(items.begin(), items.end());
  std::vector<std::string> classes;
  for (const auto& [p, name] : items) {
    if (std::find(classes.begin(), classes.end(), name) == classes.end()) classes.push_back(name);
  }
  std::sort(classes.begin(), classes.end());
  std::vector<dsp::SpectrogramClip> clips;
  for (const auto& [p, name] : items) {
    const int label =
        static_cast<int>(std::find(classes.begin(), classes.end(), name) - classes.begin());
    clips.push_back(dsp::wav_to_spectrogram(p, c.dsp, label));
  }
  if (clips.empty()) throw data::DataError("no WAV files found");
  data::write_dataset(a.out, clips, classes);
  if (clips.size() >= 2) dsp::save_norm((fs::path(a.out) / "norm").string(), dsp::fit_norm(clips, c.norm));
  exp::echo_config(a.out, c);
  std::cout << "clips=" << clips.size() << "\nclasses=" << classes.size() << "\nout=" << a.out
            << '\n';
  return 0;
}

struct SynthArgs {
  std::string task = "freq-position";
  synth::SynthTask t;
  std::size_t n = 400;
  std::size_t test_n = 0;
  std::string out;
};

int cmd_synth(SynthArgs a) {
  a.t.kind = synth::parse_task_kind(a.task);
  const auto names = synth::class_names(a.t);
  const auto train_clips = synth::generate(a.t, a.n);
  if (a.test_n == 0) {
    data::write_dataset(a.out, train_clips, names);
  } else {
    data::write_dataset((fs::path(a.out) / "train").string(), train_clips, names);
    synth::SynthTask tt = a.t;
    tt.seed = a.t.seed ^ 0x7e57'5eedULL;
    data::write_dataset((fs::path(a.out) / "test").string(), synth::generate(tt, a.test_n), names);
  }
  std::ofstream(fs::path(a.out) / "VERSION") << exp::kVersion << '\n';
  std::cout << "train=" << a.n << "\ntest=" << a.test_n << "\nout=" << a.out << '\n';
  return 0;
}

struct TrainArgs {
  ConfigFlags config;
  std::string spec_file;
  int rho = -1;
  std::string variant;
  int width = 0;
  int epochs = 0;
  long long seed = -1;
  std::string data;
  std::string test;
  std::string out;
};

void apply_train_flags(cfg::Config& c, const TrainArgs& a) {
  if (a.rho >= 0) c.rho = a.rho;
  if (!a.variant.empty()) c.variant = arch::parse_variant(a.variant);
  if (a.width > 0) c.base_width = a.width;
  if (a.epochs > 0) c.epochs = a.epochs;
  if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
}

int cmd_train(const TrainArgs& a) {
  cfg::Config c = resolve(a.config);
  apply_train_flags(c, a);
  auto [train_set, test_set] = load_split(a.data, a.test);
  std::optional<arch::NetworkSpec> spec;
  if (!a.spec_file.empty()) {
    ArchArgs aa;
    aa.spec_file = a.spec_file;
    spec = arch_spec(aa);
  }
  const auto run = exp::run_training(c, train_set, test_set, c.seed, a.out, spec);
  const int k = std::min<int>(c.last_k, static_cast<int>(run.report.epochs.size()));
  const auto s = train::summarize_last_k(std::span(&run.report, 1), k);
  std::cout << train::format_report(run.report) << exp::format_summary(s, k, 1);
  return 0;
}

struct EvalArgs {
  std::string checkpoints;
  std::string data;
  bool average = false;
};

int cmd_eval(const EvalArgs& a) {
  const auto paths = expand_glob(a.checkpoints);
  if (paths.empty()) throw data::DataError("no checkpoints match '" + a.checkpoints + "'");
  const data::ClipSet set = data::read_dataset(a.data);
  std::vector<train::Tensor<float>> probs;
  std::vector<int> labels;
  for (const auto& p : paths) {
    auto ck = model::load_checkpoint<float>(p);
    dsp::NormStats st;
    for (const auto& e : ck.extras) {
      if (e.name == "norm.mean") st.mean = e.value.cast<double>();
      if (e.name == "norm.std") st.std = e.value.cast<double>();
    }
    std::vector<dsp::SpectrogramClip> clips;
    for (const auto& clip : set.clips) {
      clips.push_back(st.mean.size() ? dsp::apply_norm(clip, st) : clip);
    }
    const auto ds = data::stack(clips, ck.net.spec().num_classes);
    labels = ds.labels;
    const auto r = train::evaluate(ck.net, ds);
    std::cout << "checkpoint=" << p << " loss=" << r.loss << " acc=" << r.accuracy << '\n';
    probs.push_back(r.probs);
  }
  if (a.average) {
    const auto avg = train::average_predictions<float>(probs);
    const auto pred = train::argmax_rows(avg);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
    std::cout << "averaged=" << probs.size()
              << " acc=" << static_cast<double>(hit) / static_cast<double>(pred.size()) << '\n';
  }
  return 0;
}

struct GridArgs {
  ConfigFlags config;
  std::string rhos;
  std::string variants;
  int runs = 0;
  int epochs = 0;
  int width = 0;
  std::string data;
  std::string test;
  std::string out;
};

int cmd_grid(const GridArgs& a) {
  cfg::Config c = resolve(a.config);
  if (!a.rhos.empty()) cfg::set(c, "grid.rhos", a.rhos);
  if (!a.variants.empty()) cfg::set(c, "grid.variants", a.variants);
  if (a.runs > 0) c.runs = a.runs;
  if (a.epochs > 0) c.epochs = a.epochs;
  if (a.width > 0) c.base_width = a.width;
  auto [train_set, test_set] = load_split(a.data, a.test);
  const auto g = exp::run_grid(c, train_set, test_set, a.out, [](const exp::GridCell& cell) {
    std::cerr << "cell rho=" << cell.rho << " variant=" << arch::to_string(cell.variant)
              << (cell.ok ? " done" : " FAILED: " + cell.error) << '\n';
  });
  std::cout << exp::format_grid(g);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Receptive-field-regularized CNNs for acoustic scene classification"};
  app.set_version_flag("--version", std::string(exp::kVersion));
  app.require_subcommand(1);

  ArchArgs arch_args;
  auto* arch_cmd = app.add_subcommand("arch", "Print the layer table or spec of a network");
  add_arch_flags(arch_cmd, arch_args);
  arch_cmd->add_flag("--emit-spec", arch_args.as_spec, "Print the spec text format instead");

  RfArgs rf_args;
  auto* rf_cmd = app.add_subcommand("rf", "Maximum receptive field of a network");
  add_arch_flags(rf_cmd, rf_args.arch);
  rf_cmd->add_flag("--table", rf_args.table, "Tabulate rho_min..rho_max");
  rf_cmd->add_option("--rho-min", rf_args.rho_min, "First row of --table");
  rf_cmd->add_option("--rho-max", rf_args.rho_max, "Last row of --table");
  rf_cmd->add_flag("--check-table", rf_args.check, "Same as check_table2");

  auto* t2_cmd = app.add_subcommand("check_table2", "Verify the 22 published max-RF values");
  t2_cmd->alias("check-table2");

  PreprocessArgs pp;
  auto* pp_cmd = app.add_subcommand("preprocess", "WAV files to spectrogram tensors");
  pp_cmd->add_option("--in", pp.in_dir, "Directory of class subdirectories, or base for --list");
  pp_cmd->add_option("--list", pp.list, "Tab-separated 'path<TAB>class' list");
  pp_cmd->add_option("--out", pp.out, "Output directory")->required();
  pp_cmd->add_option("--hop", pp.hop, "STFT hop in samples");
  pp_cmd->add_option("--mels", pp.mels, "Mel bins");
  add_config_flags(pp_cmd, pp.config);

  SynthArgs sy;
  auto* sy_cmd = app.add_subcommand("synth", "Generate a synthetic spectrogram dataset");
  sy_cmd->add_option("--task", sy.task, "freq-position or pattern-only");
  sy_cmd->add_option("--classes", sy.t.num_classes);
  sy_cmd->add_option("--n", sy.n, "Training clips");
  sy_cmd->add_option("--test-n", sy.test_n, "Test clips; writes out/train and out/test when > 0");
  sy_cmd->add_option("--mels", sy.t.mel_bins);
  sy_cmd->add_option("--frames", sy.t.frames);
  sy_cmd->add_option("--pattern", sy.t.pattern_size);
  sy_cmd->add_option("--margin", sy.t.margin);
  sy_cmd->add_option("--spacing", sy.t.band_spacing);
  sy_cmd->add_option("--channels", sy.t.channels);
  sy_cmd->add_option("--noise", sy.t.noise);
  sy_cmd->add_option("--seed", sy.t.seed);
  sy_cmd->add_option("--out", sy.out)->required();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train one network");
  add_config_flags(tr_cmd, tr.config);
  tr_cmd->add_option("--spec", tr.spec_file, "Architecture spec file");
  tr_cmd->add_option("--rho", tr.rho, "Overrides model.rho");
  tr_cmd->add_option("--variant", tr.variant, "Overrides model.variant");
  tr_cmd->add_option("--width", tr.width, "Base width");
  tr_cmd->add_option("--epochs", tr.epochs, "Overrides train.epochs");
  tr_cmd->add_option("--seed", tr.seed, "Overrides train.seed");
  tr_cmd->add_option("--data", tr.data, "Dataset directory with train/ and test/")->required();
  tr_cmd->add_option("--test", tr.test, "Separate test directory (then --data is the train set)");
  tr_cmd->add_option("--out", tr.out, "Output directory");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Evaluate checkpoints on a dataset");
  ev_cmd->add_option("--checkpoints", ev.checkpoints, "Glob of checkpoint files")->required();
  ev_cmd->add_option("--data", ev.data, "Dataset directory")->required();
  ev_cmd->add_flag("--average", ev.average, "Average predictions over all checkpoints");

  GridArgs gr;
  auto* gr_cmd = app.add_subcommand("grid", "Train every (rho, variant) cell");
  add_config_flags(gr_cmd, gr.config);
  gr_cmd->add_option("--rhos", gr.rhos, "e.g. 0-6 or 1,2,4");
  gr_cmd->add_option("--variants", gr.variants, "e.g. plain,freqaware");
  gr_cmd->add_option("--runs", gr.runs, "Runs per cell");
  gr_cmd->add_option("--epochs", gr.epochs, "Overrides train.epochs");
  gr_cmd->add_option("--width", gr.width, "Base width");
  gr_cmd->add_option("--data", gr.data, "Dataset directory with train/ and test/")->required();
  gr_cmd->add_option("--test", gr.test, "Separate test directory");
  gr_cmd->add_option("--out", gr.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*arch_cmd) return cmd_arch(arch_args);
    if (*rf_cmd) return cmd_rf(rf_args);
    if (*t2_cmd) {
      const auto r = exp::check_table2();
      std::cout << exp::format_table2(r);
      return r.ok() ? 0 : kExitVerify;
    }
    if (*pp_cmd) return cmd_preprocess(pp);
    if (*sy_cmd) return cmd_synth(sy);
    if (*tr_cmd) return cmd_train(tr);
    if (*ev_cmd) return cmd_eval(ev);
    if (*gr_cmd) return cmd_grid(gr);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const cfg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const arch::SpecError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
