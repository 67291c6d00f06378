// Copyright 2026 The vocalhf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vocalhf/audio.hpp"
#include "vocalhf/error.hpp"

namespace vocalhf::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

SectionId section_from_ordinal(int n) {
  if (n < 1 || n > 4) fail(Errc::MissingSection, "section ordinal out of range: " + std::to_string(n));
  return static_cast<SectionId>(n);
}

std::string section_file_name(SectionId s) {
  return "Section" + std::to_string(ordinal(s)) + ".wav";
}

AudioSegment decode_wav(std::span<const std::uint8_t> bytes, SectionId section) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    fail(Errc::CorruptHeader, "not a RIFF/WAVE stream");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16 || body + chunk_size > bytes.size()) {
        fail(Errc::CorruptHeader, "truncated fmt chunk");
      }
      std::uint16_t format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible && chunk_size >= 40) {
        format = read_u16(bytes, body + 24);  // first two bytes of the subformat GUID
      }
      if (format != kFormatPcm) {
        fail(Errc::UnsupportedFormat, "only linear PCM is supported (format tag " +
                                          std::to_string(format) + ")");
      }
      if (bits != 16) {
        fail(Errc::UnsupportedFormat, "only 16-bit samples are supported, got " +
                                          std::to_string(bits));
      }
      if (channels < 1 || channels > 2) {
        fail(Errc::UnsupportedFormat, "only mono or stereo is supported, got " +
                                          std::to_string(channels) + " channels");
      }
      if (rate == 0) fail(Errc::CorruptHeader, "sample rate is zero");
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      // Some writers leave the size field at 0 or oversize it when streaming.
      const std::size_t avail = bytes.size() - body;
      data = bytes.subspan(body, std::min<std::size_t>(chunk_size, avail));
      have_data = true;
      if (have_fmt) break;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt) fail(Errc::CorruptHeader, "missing fmt chunk");
  if (!have_data) fail(Errc::CorruptHeader, "missing data chunk");

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t frames = data.size() / frame_bytes;
  if (frames == 0) fail(Errc::EmptyAudio, "audio contains no samples");

  AudioSegment seg;
  seg.sample_rate = static_cast<int>(rate);
  seg.section = section;
  seg.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const auto raw = static_cast<std::int16_t>(read_u16(data, i * frame_bytes + 2 * c));
      acc += static_cast<double>(raw);
    }
    seg.samples[i] = acc / (32768.0 * channels);
  }
  return seg;
}

AudioSegment load_wav(const std::filesystem::path& path, SectionId section) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, section);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioSegment& seg) {
  if (seg.sample_rate <= 0) fail(Errc::InvalidRate, "cannot encode a non-positive sample rate");
  const auto n = static_cast<std::uint32_t>(seg.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * static_cast<std::size_t>(n));
  put_tag(out, "RIFF");
  put_u32(out, 36 + 2 * n);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(seg.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(seg.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, 2 * n);
  for (double x : seg.samples) {
    const double code = std::clamp(std::nearbyint(x * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(code)));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioSegment& seg) {
  const auto bytes = encode_wav(seg);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::IoError, "short write to " + path.string());
}

}  // namespace vocalhf::audio
