#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scriptdrift {

// ---- UTF-8 -----------------------------------------------------------------

/// Decodes UTF-8 into Unicode scalar values. Throws Error on malformed input.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);

// ---- Seeds -----------------------------------------------------------------

/// One round of SplitMix64; the base of every seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for a named stream: splitmix64(root ^ fnv1a(stream)).
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

/// Child seed for an indexed item within a stream.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

// ---- Parallelism -----------------------------------------------------------

/// Number of worker threads to use when the caller passes 0.
unsigned default_jobs();

/// Runs fn(i) for i in [0, n) over `jobs` threads. Each index runs exactly
/// once; the first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

// ---- Checksums and binary IO -----------------------------------------------

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Little-endian append-only byte buffer.
class ByteWriter {
public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void str(std::string_view s);
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
  std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked little-endian reader; throws Error(module, ...) on overrun.
class ByteReader {
public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string module)
      : bytes_(bytes), module_(std::move(module)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string str();
  std::string raw(std::size_t n);

  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string module_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path, std::string_view module);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes,
                      std::string_view module);
std::string read_text_file(const std::filesystem::path& path, std::string_view module);
void write_text_file(const std::filesystem::path& path, std::string_view text, std::string_view module);

}  // namespace scriptdrift
