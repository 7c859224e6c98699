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

#include "rfcnn/dataset.hpp"
#include "rfcnn/tensor_io.hpp"

namespace rfcnn::data {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestHeader = "# rfcnn-manifest 1";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_manifest(const Manifest& m) {
  std::ostringstream os;
  os << kManifestHeader << "\n# classes";
  for (const auto& c : m.classes) os << ' ' << c;
  os << '\n';
  for (const auto& e : m.entries) {
    os << e.file << '\t' << e.label << '\t' << e.frames << '\t' << e.source << '\n';
  }
  return os.str();
}

Manifest parse_manifest(std::string_view text) {
  Manifest m;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  bool have_header = false, have_classes = false;
  auto fail = [&](const std::string& msg) {
    throw DataError("manifest line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (line != kManifestHeader) fail("expected '" + std::string(kManifestHeader) + "'");
      have_header = true;
      continue;
    }
    if (line.rfind("# classes", 0) == 0) {
      std::istringstream cs(line.substr(9));
      std::string name;
      while (cs >> name) m.classes.push_back(name);
      have_classes = true;
      continue;
    }
    if (line[0] == '#') continue;
    const auto f = split(line, '\t');
    if (f.size() != 4) fail("expected 4 tab-separated fields, got " + std::to_string(f.size()));
    ManifestEntry e;
    e.file = f[0];
    try {
      e.label = std::stoi(f[1]);
      e.frames = std::stoul(f[2]);
    } catch (const std::exception&) {
      fail("bad label or frame count");
    }
    e.source = f[3];
    if (e.label < 0 || (have_classes && e.label >= static_cast<int>(m.classes.size()))) {
      fail("label " + f[1] + " outside [0, " + std::to_string(m.classes.size()) + ")");
    }
    m.entries.push_back(std::move(e));
  }
  if (!have_header) throw DataError("manifest: empty file");
  if (!have_classes) throw DataError("manifest: missing '# classes' line");
  return m;
}

void write_dataset(const std::string& dir, std::span<const dsp::SpectrogramClip> clips,
                   const std::vector<std::string>& classes) {
  fs::create_directories(dir);
  Manifest m;
  m.classes = classes;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "clip_%06zu.rftn", i);
    io::save_tensor((fs::path(dir) / name).string(), clips[i].values);
    m.entries.push_back({name, clips[i].label, clips[i].values.time(), clips[i].source_id});
  }
  std::ofstream os(fs::path(dir) / "manifest.txt");
  if (!os) throw DataError("cannot write manifest in " + dir);
  os << format_manifest(m);
}

ClipSet read_dataset(const std::string& dir) {
  const fs::path mpath = fs::path(dir) / "manifest.txt";
  std::ifstream is(mpath);
  if (!is) throw DataError("cannot open " + mpath.string());
  std::stringstream ss;
  ss << is.rdbuf();
  Manifest m;
  try {
    m = parse_manifest(ss.str());
  } catch (const DataError& e) {
    throw DataError(mpath.string() + ": " + e.what());
  }
  ClipSet out;
  out.classes = m.classes;
  for (const auto& e : m.entries) {
    dsp::SpectrogramClip c;
    c.values = io::load_tensor<float>((fs::path(dir) / e.file).string());
    if (c.values.time() != e.frames) {
      throw DataError(e.file + ": manifest says " + std::to_string(e.frames) +
                      " frames, tensor has " + std::to_string(c.values.time()));
    }
    c.label = e.label;
    c.source_id = e.source;
    out.clips.push_back(std::move(c));
  }
  return out;
}

Dataset stack(std::span<const dsp::SpectrogramClip> clips, int num_classes) {
  if (clips.empty()) throw DataError("empty dataset");
  const nn::Shape s = clips[0].values.shape();
  Dataset d;
  d.num_classes = num_classes;
  d.x = nn::Tensor<float>({clips.size(), s[1], s[2], s[3]});
  const std::size_t per = s[1] * s[2] * s[3];
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto& c = clips[i];
    if (c.values.shape() != s) {
      throw DataError("clip " + c.source_id + " has shape " + nn::shape_string(c.values.shape()) +
                      ", expected " + nn::shape_string(s));
    }
    if (c.label < 0 || c.label >= num_classes) {
      throw DataError("clip " + c.source_id + " has label " + std::to_string(c.label) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    std::copy(c.values.data(), c.values.data() + per, d.x.sample(i));
    d.labels.push_back(c.label);
    d.sources.push_back(c.source_id);
  }
  return d;
}

}  // namespace rfcnn::data
