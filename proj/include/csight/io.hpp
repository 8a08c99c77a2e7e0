#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace csight::io {

// Every file read in the library goes through read_file so that a run can be
// audited for which inputs it actually touched (e.g. an FD-only detection must
// never open map imagery).
std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const void* data, std::size_t size);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

void reset_read_log();
std::vector<std::string> read_log();

// Little-endian binary encoding for the CSVOC1/CSIDX1/CSPM1/CSLOC1 artifacts.
class Writer {
 public:
  void u8(std::uint8_t v);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void varint(std::uint32_t v);  // unsigned LEB128
  void bytes(const void* data, std::size_t size);
  void magic(const char* tag);  // raw ASCII, no terminator

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  void save(const std::string& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<std::uint8_t> bytes);
  static Reader from_file(const std::string& path);

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::uint32_t varint();
  void bytes(void* out, std::size_t size);
  void expect_magic(const char* tag);  // throws when the tag does not match
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const;
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

}  // namespace csight::io
