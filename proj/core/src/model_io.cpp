#include "aemon/model_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace aemon {

namespace {

constexpr char kMagic[4] = {'A', 'E', 'M', 'F'};
constexpr uint32_t kFormatVersion = 1;

uint32_t crc32(const uint8_t* data, size_t size) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  uint32_t crc = 0xFFFFFFFFu;
  for (size_t i = 0; i < size; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

template <class T>
void append_pod(std::string& buf, T v) {
  char tmp[sizeof(T)];
  std::memcpy(tmp, &v, sizeof(T));
  buf.append(tmp, sizeof(T));
}

template <class T>
T read_pod(const std::string& buf, size_t& off) {
  if (off + sizeof(T) > buf.size()) throw IntegrityError("model file truncated");
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

nlohmann::json arch_to_json(const ArchitectureSpec& s) {
  nlohmann::json j;
  j["variant"] = to_string(s.variant);
  j["window_length"] = s.window_length;
  j["channels"] = s.channels;
  j["hidden_widths"] = s.hidden_widths;
  j["latent_dim"] = s.latent_dim;
  j["conv"] = nlohmann::json::array();
  for (const auto& c : s.conv)
    j["conv"].push_back({{"out_channels", c.out_channels}, {"kernel", c.kernel},
                         {"stride", c.stride}});
  return j;
}

ArchitectureSpec arch_from_json(const nlohmann::json& j) {
  ArchitectureSpec s;
  s.variant = variant_from_string(j.at("variant").get<std::string>());
  s.window_length = j.at("window_length").get<int>();
  s.channels = j.at("channels").get<int>();
  s.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  s.latent_dim = j.at("latent_dim").get<int>();
  s.conv.clear();
  for (const auto& c : j.at("conv"))
    s.conv.push_back({c.at("out_channels").get<int>(), c.at("kernel").get<int>(),
                      c.at("stride").get<int>()});
  return s;
}

nlohmann::json profile_to_json(const ThresholdProfile& p) {
  nlohmann::json j;
  j["per_feature"] = p.per_feature;
  j["tolerance_factor"] = p.tolerance_factor;
  j["aggregate"] = p.aggregate;
  if (p.lower) j["lower"] = *p.lower;
  if (p.upper) j["upper"] = *p.upper;
  return j;
}

ThresholdProfile profile_from_json(const nlohmann::json& j) {
  ThresholdProfile p;
  p.per_feature = j.at("per_feature").get<std::vector<double>>();
  p.tolerance_factor = j.at("tolerance_factor").get<double>();
  p.aggregate = j.at("aggregate").get<double>();
  if (j.contains("lower")) p.lower = j.at("lower").get<double>();
  if (j.contains("upper")) p.upper = j.at("upper").get<double>();
  return p;
}

}  // namespace

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
  nlohmann::json header;
  header["arch"] = arch_to_json(artifact.bundle.spec);
  header["norm"] = {{"mean", artifact.bundle.norm.mean},
                    {"std", artifact.bundle.norm.std_dev}};
  header["meta"] = {{"seed", artifact.bundle.meta.seed},
                    {"epochs", artifact.bundle.meta.epochs},
                    {"final_loss", artifact.bundle.meta.final_loss}};
  header["channels"] = nlohmann::json::array();
  for (const auto& c : artifact.channels)
    header["channels"].push_back({{"name", c.name}, {"kind", to_string(c.kind)}});
  header["sample_rate"] = artifact.sample_rate;
  if (artifact.profile) header["profile"] = profile_to_json(*artifact.profile);
  header["provenance"] = {{"seed", artifact.provenance.seed},
                          {"config_hash", artifact.provenance.config_hash},
                          {"corpus_hash", artifact.provenance.corpus_hash},
                          {"holdout_runs", artifact.provenance.holdout_runs}};

  // The parameter manifest pins the blob layout.
  auto& net = const_cast<ModelBundle&>(artifact.bundle).net;
  auto params = net.params();
  header["params"] = nlohmann::json::array();
  for (const auto& p : params)
    header["params"].push_back({{"name", p.name}, {"size", p.values->size()}});

  const std::string header_str = header.dump();
  std::string buf;
  buf.append(kMagic, 4);
  append_pod(buf, kFormatVersion);
  append_pod(buf, uint64_t(header_str.size()));
  buf += header_str;
  uint64_t float_count = 0;
  for (const auto& p : params) float_count += p.values->size();
  append_pod(buf, float_count);
  for (const auto& p : params)
    buf.append(reinterpret_cast<const char*>(p.values->data()),
               p.values->size() * sizeof(float));
  append_pod(buf, crc32(reinterpret_cast<const uint8_t*>(buf.data()), buf.size()));

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  size_t off = 0;
  if (buf.size() < 4 + sizeof(uint32_t) + sizeof(uint64_t) + sizeof(uint32_t))
    throw IntegrityError("model file truncated: " + path.string());
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw IntegrityError("not a model file (bad magic): " + path.string());
  off = 4;
  const uint32_t version = read_pod<uint32_t>(buf, off);
  if (version != kFormatVersion)
    throw IntegrityError("unsupported model format version " + std::to_string(version) +
                         " (expected " + std::to_string(kFormatVersion) + ")");

  const uint32_t stored_crc =
      crc32(reinterpret_cast<const uint8_t*>(buf.data()), buf.size() - sizeof(uint32_t));
  uint32_t file_crc;
  std::memcpy(&file_crc, buf.data() + buf.size() - sizeof(uint32_t), sizeof(uint32_t));
  if (stored_crc != file_crc)
    throw IntegrityError("model file checksum mismatch: " + path.string());

  const uint64_t header_len = read_pod<uint64_t>(buf, off);
  if (off + header_len > buf.size()) throw IntegrityError("model file truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(buf.substr(off, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("model header is not valid JSON: " + std::string(e.what()));
  }
  off += header_len;

  ModelArtifact artifact;
  try {
    const ArchitectureSpec spec = arch_from_json(header.at("arch"));
    artifact.bundle.spec = spec;
    artifact.bundle.net = AutoencoderNet<float>(spec, 0);
    artifact.bundle.norm.mean = header.at("norm").at("mean").get<std::vector<double>>();
    artifact.bundle.norm.std_dev = header.at("norm").at("std").get<std::vector<double>>();
    artifact.bundle.meta.seed = header.at("meta").at("seed").get<uint64_t>();
    artifact.bundle.meta.epochs = header.at("meta").at("epochs").get<int>();
    artifact.bundle.meta.final_loss = header.at("meta").at("final_loss").get<double>();
    for (const auto& c : header.at("channels"))
      artifact.channels.push_back({c.at("name").get<std::string>(),
                                   channel_kind_from_string(c.at("kind").get<std::string>())});
    artifact.sample_rate = header.at("sample_rate").get<double>();
    if (header.contains("profile")) artifact.profile = profile_from_json(header.at("profile"));
    const auto& prov = header.at("provenance");
    artifact.provenance.seed = prov.at("seed").get<uint64_t>();
    artifact.provenance.config_hash = prov.at("config_hash").get<std::string>();
    artifact.provenance.corpus_hash = prov.at("corpus_hash").get<std::string>();
    artifact.provenance.holdout_runs =
        prov.at("holdout_runs").get<std::vector<std::string>>();

    const uint64_t float_count = read_pod<uint64_t>(buf, off);
    auto params = artifact.bundle.net.params();
    const auto& manifest = header.at("params");
    if (manifest.size() != params.size())
      throw IntegrityError("model parameter manifest does not match architecture");
    uint64_t expected = 0;
    for (size_t i = 0; i < params.size(); ++i) {
      if (manifest[i].at("name").get<std::string>() != params[i].name ||
          manifest[i].at("size").get<size_t>() != params[i].values->size())
        throw IntegrityError("model parameter manifest does not match architecture");
      expected += params[i].values->size();
    }
    if (float_count != expected)
      throw IntegrityError("model parameter blob size does not match architecture");
    if (off + float_count * sizeof(float) + sizeof(uint32_t) != buf.size())
      throw IntegrityError("model file has trailing or missing bytes");
    for (auto& p : params) {
      std::memcpy(p.values->data(), buf.data() + off, p.values->size() * sizeof(float));
      off += p.values->size() * sizeof(float);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError("model header field error: " + std::string(e.what()));
  }
  return artifact;
}

uint64_t fnv1a_bytes(const void* data, size_t size, uint64_t h) {
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_string(const std::string& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a_bytes(s.data(), s.size())));
  return buf;
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for hashing: " + path.string());
  uint64_t h = 0xcbf29ce484222325ull;
  char chunk[65536];
  while (in.read(chunk, sizeof chunk) || in.gcount() > 0)
    h = fnv1a_bytes(chunk, size_t(in.gcount()), h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace aemon
