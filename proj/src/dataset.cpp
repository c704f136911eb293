#include "tgrasp/dataset.hpp"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tgrasp/errors.hpp"

namespace tgrasp {

namespace fs = std::filesystem;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

bool has_space(std::string_view s) {
  return s.empty() || s.find_first_of(" \t\r\n") != std::string_view::npos;
}

template <typename T>
T parse_int(std::string_view text, std::string_view what) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError("manifest: bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

// Splits "key=value"; throws when the key does not match.
std::string_view field(std::string_view token, std::string_view key) {
  if (token.size() <= key.size() || token.substr(0, key.size()) != key ||
      token[key.size()] != '=') {
    throw FormatError("manifest: expected '" + std::string(key) + "=' in '" +
                      std::string(token) + "'");
  }
  return token.substr(key.size() + 1);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Value part of "<directive> <key> <value with spaces>".
std::string rest_after(std::string_view line, std::size_t tokens) {
  std::size_t i = 0;
  for (std::size_t t = 0; t < tokens; ++t) {
    while (i < line.size() && line[i] == ' ') ++i;
    while (i < line.size() && line[i] != ' ') ++i;
  }
  if (i < line.size() && line[i] == ' ') ++i;
  return std::string(line.substr(i));
}

}  // namespace

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, bytes.data() + off, n);
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string crc_hex(std::uint32_t crc) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", crc);
  return buf;
}

fs::path payload_path_for(const fs::path& manifest) {
  fs::path p = manifest;
  p += ".bin";
  return p;
}

std::vector<std::uint8_t> encode_payload(std::span<const GraspRecording> recordings) {
  std::size_t frames = 0;
  for (const auto& r : recordings) frames += r.frames.size();
  std::vector<std::uint8_t> out;
  out.reserve(frames * kFrameRecordBytes);
  for (const auto& rec : recordings) {
    for (const auto& f : rec.frames) {
      put_u64(out, static_cast<std::uint64_t>(f.timestamp_ms));
      for (float v : f.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  return out;
}

std::uint32_t write_dataset(const fs::path& manifest, std::span<const GraspRecording> recordings,
                            std::span<const std::pair<std::string, std::string>> params,
                            std::int64_t frame_interval_ms) {
  for (const auto& rec : recordings) {
    validate_recording(rec);
    if (has_space(rec.id)) throw StructuralError("recording id '" + rec.id + "' is empty or has whitespace");
    for (const auto& [k, v] : rec.meta) {
      if (has_space(k) || v.find('\n') != std::string::npos) {
        throw StructuralError("recording '" + rec.id + "': bad meta entry '" + k + "'");
      }
    }
  }
  for (const auto& [k, v] : params) {
    if (has_space(k) || v.find('\n') != std::string::npos) {
      throw StructuralError("bad dataset param '" + k + "'");
    }
  }

  const auto payload = encode_payload(recordings);
  const std::uint32_t crc = crc32_of(payload);
  const fs::path payload_file = payload_path_for(manifest);

  {
    std::ofstream bin(payload_file, std::ios::binary | std::ios::trunc);
    if (!bin) throw IoError("cannot open " + payload_file.string() + " for writing");
    bin.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!bin) throw IoError("write failed: " + payload_file.string());
  }

  std::ostringstream m;
  m << "TGD " << kDatasetVersion << '\n'
    << "frame_interval_ms " << frame_interval_ms << '\n'
    << "layout " << kRows << ' ' << kCols << ' ' << kFingers << ' ' << kArraysPerFinger << '\n'
    << "payload " << payload_file.filename().string() << '\n'
    << "payload_bytes " << payload.size() << '\n'
    << "payload_crc32 " << crc_hex(crc) << '\n'
    << "recordings " << recordings.size() << '\n';
  for (const auto& [k, v] : params) m << "param " << k << ' ' << v << '\n';
  for (const auto& rec : recordings) {
    const auto& p = rec.phases;
    m << "recording " << rec.id << " frames=" << rec.frames.size()
      << " label=" << (rec.label ? rec.label->to_string() : "none") << " phases=" << p.approach
      << ',' << p.grasp << ',' << p.hold << ',' << p.release << '\n';
    for (const auto& [k, v] : rec.meta) m << "meta " << k << ' ' << v << '\n';
  }
  m << "end\n";

  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw IoError("cannot open " + manifest.string() + " for writing");
  out << m.str();
  if (!out) throw IoError("write failed: " + manifest.string());
  return crc;
}

Dataset read_dataset(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open " + manifest.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError("manifest is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto tok = split_ws(line);
    if (tok.size() != 2 || tok[0] != "TGD") throw FormatError("bad magic: not a TGD manifest");
    if (tok[1] != std::to_string(kDatasetVersion)) {
      throw FormatError("unsupported TGD version '" + std::string(tok[1]) + "'");
    }
  }

  Dataset ds;
  std::string payload_name;
  std::size_t payload_bytes = 0;
  std::optional<std::uint32_t> declared_crc;
  std::optional<std::size_t> declared_count;
  std::vector<std::size_t> frame_counts;
  bool ended = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tok = split_ws(line);
    const auto& d = tok[0];
    if (d == "end") {
      ended = true;
      break;
    } else if (d == "frame_interval_ms" && tok.size() == 2) {
      ds.frame_interval_ms = parse_int<std::int64_t>(tok[1], "frame interval");
    } else if (d == "layout" && tok.size() == 5) {
      if (parse_int<std::size_t>(tok[1], "layout") != kRows ||
          parse_int<std::size_t>(tok[2], "layout") != kCols ||
          parse_int<std::size_t>(tok[3], "layout") != kFingers ||
          parse_int<std::size_t>(tok[4], "layout") != kArraysPerFinger) {
        throw FormatError("manifest layout does not match 24x16 / 4 fingers / 6 arrays");
      }
    } else if (d == "payload" && tok.size() == 2) {
      payload_name = std::string(tok[1]);
    } else if (d == "payload_bytes" && tok.size() == 2) {
      payload_bytes = parse_int<std::size_t>(tok[1], "payload size");
    } else if (d == "payload_crc32" && tok.size() == 2) {
      std::uint32_t v = 0;
      auto [ptr, ec] = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), v, 16);
      if (ec != std::errc() || ptr != tok[1].data() + tok[1].size()) {
        throw FormatError("manifest: bad crc");
      }
      declared_crc = v;
    } else if (d == "recordings" && tok.size() == 2) {
      declared_count = parse_int<std::size_t>(tok[1], "recording count");
    } else if (d == "param" && tok.size() >= 2) {
      ds.params.emplace_back(std::string(tok[1]), rest_after(line, 2));
    } else if (d == "recording" && tok.size() == 5) {
      GraspRecording rec;
      rec.id = std::string(tok[1]);
      frame_counts.push_back(parse_int<std::size_t>(field(tok[2], "frames"), "frame count"));
      const auto label = field(tok[3], "label");
      if (label != "none") rec.label = GraspState::parse(label);
      const auto ph = field(tok[4], "phases");
      std::size_t marks[4];
      std::size_t start = 0;
      for (int i = 0; i < 4; ++i) {
        const auto comma = ph.find(',', start);
        if ((i < 3) == (comma == std::string_view::npos)) throw FormatError("manifest: bad phases");
        marks[i] = parse_int<std::size_t>(ph.substr(start, comma - start), "phase mark");
        start = comma + 1;
      }
      rec.phases = {marks[0], marks[1], marks[2], marks[3]};
      ds.recordings.push_back(std::move(rec));
    } else if (d == "meta" && tok.size() >= 2) {
      if (ds.recordings.empty()) throw FormatError("manifest: meta before any recording");
      ds.recordings.back().meta[std::string(tok[1])] = rest_after(line, 2);
    } else {
      throw FormatError("manifest: unrecognized line '" + line + "'");
    }
  }
  if (!ended) throw FormatError("manifest: missing 'end'");
  if (!declared_crc || payload_name.empty() || !declared_count) {
    throw FormatError("manifest: missing payload/crc/recordings directive");
  }
  if (*declared_count != ds.recordings.size()) {
    throw FormatError("manifest: recording count mismatch");
  }

  const fs::path payload_file = manifest.parent_path() / payload_name;
  std::ifstream bin(payload_file, std::ios::binary);
  if (!bin) throw IoError("cannot open payload " + payload_file.string());
  std::vector<std::uint8_t> payload((std::istreambuf_iterator<char>(bin)),
                                    std::istreambuf_iterator<char>());

  std::size_t off = 0;
  long global_frame = 0;
  for (std::size_t r = 0; r < ds.recordings.size(); ++r) {
    auto& rec = ds.recordings[r];
    rec.frames.resize(frame_counts[r]);
    for (std::size_t i = 0; i < frame_counts[r]; ++i, ++global_frame) {
      if (payload.size() - off < kFrameRecordBytes) {
        throw IoError("payload truncated at frame " + std::to_string(i) + " of recording '" +
                          rec.id + "' (payload frame " + std::to_string(global_frame) + ")",
                      global_frame);
      }
      auto& f = rec.frames[i];
      f.timestamp_ms = static_cast<std::int64_t>(get_u64(payload.data() + off));
      off += 8;
      for (auto& v : f.values) {
        v = std::bit_cast<float>(get_u32(payload.data() + off));
        off += 4;
      }
    }
    validate_recording(rec);
  }
  if (off != payload.size() || payload.size() != payload_bytes) {
    throw FormatError("payload size does not match manifest");
  }
  ds.payload_crc32 = crc32_of(payload);
  if (ds.payload_crc32 != *declared_crc) {
    throw FormatError("payload CRC mismatch: manifest " + crc_hex(*declared_crc) + ", payload " +
                      crc_hex(ds.payload_crc32));
  }
  return ds;
}

}  // namespace tgrasp
