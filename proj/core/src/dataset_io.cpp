#include "aemon/dataset_io.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace aemon {

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(contents.data(), std::streamsize(contents.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + " (" + ec.message() + ")");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void write_run(const TimeSeries& series, const std::filesystem::path& path) {
  series.validate();
  std::string out;
  const int n = series.channel_count();
  const int64_t len = series.length();
  out.reserve(size_t(len) * size_t(n) * 12 + 64);
  out += "t";
  for (const auto& c : series.channels) {
    out += ',';
    out += c.name;
  }
  out += '\n';
  char buf[48];
  for (int64_t t = 0; t < len; ++t) {
    int m = std::snprintf(buf, sizeof buf, "%" PRId64, t);
    out.append(buf, size_t(m));
    for (int c = 0; c < n; ++c) {
      // %.9g round-trips float exactly.
      m = std::snprintf(buf, sizeof buf, ",%.9g", double(series.at(t, c)));
      out.append(buf, size_t(m));
    }
    out += '\n';
  }
  atomic_write(path, out);
}

namespace {

TimeSeries read_run_impl(const std::filesystem::path& path,
                         const std::vector<Channel>* schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open run file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty run file: " + path.string(), 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t")
    throw ParseError("run file header must start with 't': " + path.string(), 1);

  TimeSeries series;
  const size_t n = header.size() - 1;
  if (n == 0) throw ParseError("run file has no channels: " + path.string(), 1);
  if (schema) {
    if (schema->size() != n) {
      // Name the first column the schema expects but the file lacks.
      for (const auto& c : *schema) {
        bool found = false;
        for (size_t i = 1; i < header.size(); ++i)
          if (header[i] == c.name) {
            found = true;
            break;
          }
        if (!found)
          throw ParseError("run file is missing column '" + c.name + "': " + path.string(),
                           1);
      }
      throw ParseError("run file channel count does not match schema: " + path.string(), 1);
    }
    for (size_t i = 0; i < n; ++i)
      if (header[i + 1] != (*schema)[i].name)
        throw ParseError("run file column '" + header[i + 1] + "' does not match schema '" +
                             (*schema)[i].name + "'",
                         1);
    series.channels = *schema;
  } else {
    series.channels.reserve(n);
    for (size_t i = 1; i < header.size(); ++i)
      series.channels.push_back({header[i], ChannelKind::Other});
  }

  long line_no = 1;
  int64_t expected_t = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != n + 1)
      throw ParseError("row has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(n + 1),
                       line_no);
    int64_t t = 0;
    {
      auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), t);
      if (ec != std::errc() || p != fields[0].data() + fields[0].size())
        throw ParseError("malformed sample index '" + fields[0] + "'", line_no);
    }
    if (t != expected_t)
      throw ParseError("sample index " + std::to_string(t) + " out of order, expected " +
                           std::to_string(expected_t),
                       line_no);
    ++expected_t;
    for (size_t i = 0; i < n; ++i) {
      const std::string& f = fields[i + 1];
      float v = 0.0f;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size())
        throw ParseError("malformed value '" + f + "' in column " + series.channels[i].name,
                         line_no);
      if (!std::isfinite(v))
        throw ParseError("non-finite value in column " + series.channels[i].name, line_no);
      series.data.push_back(v);
    }
  }
  if (series.data.empty()) throw ParseError("run file has no samples: " + path.string(), 2);
  return series;
}

}  // namespace

TimeSeries read_run(const std::filesystem::path& path) { return read_run_impl(path, nullptr); }

TimeSeries read_run(const std::filesystem::path& path, const std::vector<Channel>& schema) {
  return read_run_impl(path, &schema);
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json j;
  j["schema_version"] = manifest.schema_version;
  j["sample_rate"] = manifest.sample_rate;
  j["channels"] = nlohmann::json::array();
  for (const auto& c : manifest.channels)
    j["channels"].push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  j["runs"] = nlohmann::json::array();
  for (const auto& r : manifest.runs) {
    nlohmann::json e;
    e["path"] = r.path;
    e["kind"] = r.kind;
    e["scenario"] = r.scenario;
    e["tag"] = r.tag;
    if (r.onset_index) e["onset_index"] = *r.onset_index;
    else e["onset_index"] = nullptr;
    e["seed"] = r.seed;
    j["runs"].push_back(e);
  }
  atomic_write(path, j.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest is not valid JSON: " + std::string(e.what()));
  }
  try {
    DatasetManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1)
      throw IntegrityError("unsupported manifest schema version " +
                           std::to_string(m.schema_version));
    m.sample_rate = j.at("sample_rate").get<double>();
    for (const auto& c : j.at("channels"))
      m.channels.push_back({c.at("name").get<std::string>(),
                            channel_kind_from_string(c.at("kind").get<std::string>())});
    for (const auto& e : j.at("runs")) {
      RunEntry r;
      r.path = e.at("path").get<std::string>();
      r.kind = e.at("kind").get<std::string>();
      r.scenario = e.value("scenario", std::string());
      r.tag = e.value("tag", std::string());
      if (e.contains("onset_index") && !e.at("onset_index").is_null())
        r.onset_index = e.at("onset_index").get<int64_t>();
      r.seed = e.value("seed", uint64_t(0));
      m.runs.push_back(std::move(r));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest field error: " + std::string(e.what()));
  }
}

std::vector<TimeSeries> Corpus::nominal_series() const {
  std::vector<TimeSeries> out;
  for (const auto& r : runs)
    if (r.entry.kind == "nominal") out.push_back(r.series);
  return out;
}

std::vector<const LoadedRun*> Corpus::failure_runs() const {
  std::vector<const LoadedRun*> out;
  for (const auto& r : runs)
    if (r.entry.kind == "failure") out.push_back(&r);
  return out;
}

Corpus load_corpus(const std::filesystem::path& manifest_or_dir) {
  std::filesystem::path manifest_path = manifest_or_dir;
  if (std::filesystem::is_directory(manifest_path)) manifest_path /= "manifest.json";
  Corpus corpus;
  corpus.manifest = read_manifest(manifest_path);
  corpus.root = manifest_path.parent_path();
  for (const auto& entry : corpus.manifest.runs) {
    const auto run_path = corpus.root / entry.path;
    if (!std::filesystem::exists(run_path))
      throw IoError("manifest references a missing run file: " + run_path.string());
    LoadedRun run;
    run.entry = entry;
    run.series = read_run(run_path, corpus.manifest.channels);
    run.series.sample_rate = corpus.manifest.sample_rate;
    if (entry.onset_index)
      run.series.labels.push_back({*entry.onset_index, entry.tag});
    run.series.validate();
    corpus.runs.push_back(std::move(run));
  }
  return corpus;
}

}  // namespace aemon
