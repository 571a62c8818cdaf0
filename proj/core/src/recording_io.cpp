#include "vigilkit/recording_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "vigilkit/error.hpp"
#include "vigilkit/table_io.hpp"

namespace vigilkit::io {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "recording payloads are little-endian; big-endian hosts need byte swapping");

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(1, path + ": " + e.what());
  }
}

void write_json(const ordered_json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace

eeg::Recording read_recording(const std::string& sidecar_path) {
  const json h = read_json(sidecar_path);
  if (h.value("schema", "") != kRecordingSchema)
    throw ParseError(1, sidecar_path + ": schema must be '" + std::string(kRecordingSchema) + "'");
  if (h.value("dtype", "float32") != "float32" || h.value("byte_order", "little-endian") != "little-endian" ||
      h.value("layout", "sample-major") != "sample-major")
    throw ParseError(1, sidecar_path + ": only float32 little-endian sample-major payloads are supported");

  eeg::Recording rec;
  try {
    rec.fs_hz = h.at("fs_hz").get<double>();
    rec.channel_names = h.at("channel_names").get<std::vector<std::string>>();
    rec.eog_channels = h.value("eog_channels", std::vector<std::string>{});
    const auto n_channels = h.at("n_channels").get<std::size_t>();
    if (n_channels != rec.channel_names.size())
      throw ParseError(1, sidecar_path + ": n_channels disagrees with channel_names");
    const std::string state = h.value("state", "eo");
    rec.state = state == "ec" ? eeg::EyeState::EyesClosed : eeg::EyeState::EyesOpen;
  } catch (const json::exception& e) {
    throw ParseError(1, sidecar_path + ": " + e.what());
  }

  fs::path payload = h.contains("data_file")
                         ? fs::path(sidecar_path).parent_path() / h["data_file"].get<std::string>()
                         : fs::path(sidecar_path).replace_extension(".bin");
  std::ifstream in(payload, std::ios::binary);
  if (!in) throw Error("cannot open recording payload '" + payload.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t frame = rec.channel_names.size() * sizeof(float);
  if (frame == 0 || bytes.size() % frame != 0)
    throw ParseError(1, payload.string() + ": payload size is not a whole number of frames");
  const auto n_samples = static_cast<Eigen::Index>(bytes.size() / frame);
  const auto n_ch = static_cast<Eigen::Index>(rec.channel_names.size());
  rec.data.resize(n_ch, n_samples);
  for (Eigen::Index s = 0; s < n_samples; ++s) {
    for (Eigen::Index c = 0; c < n_ch; ++c) {
      float v;
      std::memcpy(&v, bytes.data() + static_cast<std::size_t>((s * n_ch + c)) * sizeof(float), sizeof(float));
      rec.data(c, s) = v;
    }
  }
  rec.validate();
  return rec;
}

void write_recording(const eeg::Recording& rec, const std::string& stem) {
  const fs::path json_path = stem + ".json";
  const fs::path bin_path = stem + ".bin";
  ordered_json h;
  h["schema"] = kRecordingSchema;
  h["fs_hz"] = rec.fs_hz;
  h["n_channels"] = rec.channel_names.size();
  h["channel_names"] = rec.channel_names;
  h["eog_channels"] = rec.eog_channels;
  h["dtype"] = "float32";
  h["byte_order"] = "little-endian";
  h["layout"] = "sample-major";
  h["state"] = rec.state == eeg::EyeState::EyesClosed ? "ec" : "eo";
  h["data_file"] = bin_path.filename().string();
  write_json(h, json_path.string());

  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + bin_path.string() + "'");
  std::vector<float> frame(static_cast<std::size_t>(rec.channels()));
  for (Eigen::Index s = 0; s < rec.samples(); ++s) {
    for (Eigen::Index c = 0; c < rec.channels(); ++c) frame[static_cast<std::size_t>(c)] = static_cast<float>(rec.data(c, s));
    out.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size() * sizeof(float)));
  }
}

eeg::Recording read_recording_csv(const std::string& path, double fs_hz, std::vector<std::string> eog_channels) {
  const Table t = read_csv(path);
  eeg::Recording rec;
  rec.fs_hz = fs_hz;
  rec.channel_names = t.header;
  rec.eog_channels = std::move(eog_channels);
  rec.data.resize(static_cast<Eigen::Index>(t.header.size()), static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const auto col = t.numeric_column(static_cast<int>(c));
    for (std::size_t s = 0; s < col.size(); ++s)
      rec.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s)) = col[s];
  }
  rec.validate();
  return rec;
}

eeg::BandSet read_band_set(const std::string& path) {
  const json j = read_json(path);
  std::vector<eeg::Band> bands;
  try {
    const json& arr = j.is_object() ? j.at("bands") : j;
    for (const auto& b : arr)
      bands.push_back({b.at("lo_hz").get<double>(), b.at("hi_hz").get<double>(), b.at("name").get<std::string>()});
  } catch (const json::exception& e) {
    throw ParseError(1, path + ": " + e.what());
  }
  return eeg::BandSet(std::move(bands));
}

void write_band_set(const eeg::BandSet& bands, const std::string& path) {
  ordered_json arr = ordered_json::array();
  for (const auto& b : bands.bands()) {
    ordered_json e;
    e["name"] = b.name;
    e["lo_hz"] = b.lo_hz;
    e["hi_hz"] = b.hi_hz;
    arr.push_back(e);
  }
  ordered_json j;
  j["bands"] = arr;
  write_json(j, path);
}

eeg::RoiMap read_roi_map(const std::string& path) {
  const json j = read_json(path);
  std::vector<eeg::Roi> rois;
  try {
    for (const auto& r : j.at("rois"))
      rois.push_back({r.at("label").get<std::string>(), r.at("channels").get<std::vector<std::string>>()});
  } catch (const json::exception& e) {
    throw ParseError(1, path + ": " + e.what());
  }
  return eeg::RoiMap(std::move(rois));
}

void write_roi_map(const eeg::RoiMap& rois, const std::string& path) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rois.rois()) {
    ordered_json e;
    e["label"] = r.label;
    e["channels"] = r.channels;
    arr.push_back(e);
  }
  ordered_json j;
  j["rois"] = arr;
  write_json(j, path);
}

}  // namespace vigilkit::io
