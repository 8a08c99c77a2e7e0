#include "csight/io.hpp"

#include <cstdio>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace csight::io {

namespace {
std::mutex g_log_mutex;
std::vector<std::string> g_read_log;
}  // namespace

std::vector<std::uint8_t> read_file(const std::string& path) {
  {
    std::lock_guard<std::mutex> lock(g_log_mutex);
    g_read_log.push_back(path);
  }
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("unreadable file: " + path);
  std::fseek(f, 0, SEEK_END);
  long size = std::ftell(f);
  if (size < 0) {
    std::fclose(f);
    throw std::runtime_error("unreadable file: " + path);
  }
  std::fseek(f, 0, SEEK_SET);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  std::size_t got = size ? std::fread(bytes.data(), 1, bytes.size(), f) : 0;
  std::fclose(f);
  if (got != bytes.size()) throw std::runtime_error("unreadable file: " + path);
  return bytes;
}

void write_file(const std::string& path, const void* data, std::size_t size) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot write file: " + path);
  std::size_t put = size ? std::fwrite(data, 1, size, f) : 0;
  int rc = std::fclose(f);
  if (put != size || rc != 0) throw std::runtime_error("cannot write file: " + path);
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  write_file(path, bytes.data(), bytes.size());
}

void reset_read_log() {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_read_log.clear();
}

std::vector<std::string> read_log() {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  return g_read_log;
}

void Writer::u8(std::uint8_t v) { buf_.push_back(v); }

void Writer::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v & 0xff));
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void Writer::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void Writer::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void Writer::f32(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  u32(bits);
}

void Writer::f64(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  u64(bits);
}

void Writer::varint(std::uint32_t v) {
  while (v >= 0x80) {
    buf_.push_back(static_cast<std::uint8_t>(v) | 0x80);
    v >>= 7;
  }
  buf_.push_back(static_cast<std::uint8_t>(v));
}

void Writer::bytes(const void* data, std::size_t size) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  buf_.insert(buf_.end(), p, p + size);
}

void Writer::magic(const char* tag) { bytes(tag, std::strlen(tag)); }

void Writer::save(const std::string& path) const { write_file(path, buf_); }

Reader::Reader(std::vector<std::uint8_t> bytes) : buf_(std::move(bytes)) {}

Reader Reader::from_file(const std::string& path) { return Reader(read_file(path)); }

void Reader::need(std::size_t n) const {
  if (pos_ + n > buf_.size()) throw std::runtime_error("unreadable: truncated data");
}

std::uint8_t Reader::u8() {
  need(1);
  return buf_[pos_++];
}

std::uint16_t Reader::u16() {
  need(2);
  std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

float Reader::f32() {
  std::uint32_t bits = u32();
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

double Reader::f64() {
  std::uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::uint32_t Reader::varint() {
  std::uint32_t v = 0;
  int shift = 0;
  for (;;) {
    std::uint8_t b = u8();
    v |= static_cast<std::uint32_t>(b & 0x7f) << shift;
    if (!(b & 0x80)) break;
    shift += 7;
    if (shift > 28) throw std::runtime_error("unreadable: bad varint");
  }
  return v;
}

void Reader::bytes(void* out, std::size_t size) {
  need(size);
  std::memcpy(out, buf_.data() + pos_, size);
  pos_ += size;
}

void Reader::expect_magic(const char* tag) {
  std::size_t n = std::strlen(tag);
  need(n);
  if (std::memcmp(buf_.data() + pos_, tag, n) != 0)
    throw std::runtime_error(std::string("bad magic, expected ") + tag);
  pos_ += n;
}

}  // namespace csight::io
